"""
Artifact files: writers/readers shared by the pipeline stages, and plot-ready
figure-data exports.

Every CSV starts with a `# recombination-lab <version> config=<hash>` comment
line followed by a header row; JSON artifacts carry the same data under `_meta`.
"""

from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple
import json
import logging

import pandas as pd

from app import __version__
from app.analysis.curves import s_histogram
from app.errors import DomainError, MissingArtifactError
from app.models import PatentMetrics, PatentRecord

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"

DOCUMENTS = "documents.jsonl"
SNAPSHOT = "novelty.idx"
NOVELTY = "patent_novelty.csv"
METRICS = "patent_metrics.csv"
MATCHES = "matches.csv"
SIM_SUMMARY = "sim_summary.csv"
SIM_QUANTILES = "sim_value_quantiles.csv"

# artifact -> (producing stage, documented columns)
ARTIFACTS: Dict[str, Tuple[str, str]] = {
    DOCUMENTS: ("ingest", "one JSON object per patent: id,date,inventors,firm,ipc_class,cites,tokens"),
    SNAPSHOT: ("index", "binary novelty index with its word-pair intern table"),
    NOVELTY: ("index", "id,date,W_p,novelty"),
    METRICS: ("metrics", "id,date,year,firm,ipc_class,H_p,M_p,W_p,n_p,s_p,Kbar_p,c_p,flag_empty_pairs"),
    "fit.json": ("regress", "coefficients, clustered SEs, BIC table, chosen order"),
    "curve_expectation.csv": ("regress", "s,fit,lo95,hi95"),
    "curve_quantiles.csv": ("quantiles", "tau,s,fit"),
    MATCHES: ("simulate", "category,i,j,s,gross,cost,A,active"),
    SIM_SUMMARY: ("simulate", "metric,value"),
    SIM_QUANTILES: ("simulate", "tau,s,value"),
}

METRICS_COLUMNS = ARTIFACTS[METRICS][1].split(",")

FIGURE_FILES = {
    "fig1": ("fig1_s_histogram.csv", "fig1_expectation.csv", "fig1_quantiles.csv"),
    "fig2": ("fig2_s_histogram.csv", "fig2_expectation.csv", "fig2_quantiles.csv"),
    "fig3": ("fig3_matched_s_histogram.csv", "fig3_value_quantiles.csv"),
}
# suffix -> columns; longer suffixes first so lookups by suffix are unambiguous
FIGURE_COLUMNS = {
    "value_quantiles": "tau,s,value",
    "histogram": "bin_lo,bin_hi,count",
    "expectation": "s,fit,lo95,hi95",
    "quantiles": "tau,s,fit",
}


def outcome_suffix(outcome: str) -> str:
    return "_citations" if outcome == "c_p" else ""


def fit_file(outcome: str) -> str:
    return f"fit{outcome_suffix(outcome)}.json"


def expectation_file(outcome: str) -> str:
    return f"curve_expectation{outcome_suffix(outcome)}.csv"


def quantiles_file(outcome: str) -> str:
    return f"curve_quantiles{outcome_suffix(outcome)}.csv"


def header_line(config_hash: str) -> str:
    return f"# recombination-lab {__version__} config={config_hash}"


def meta(config_hash: str, **extra) -> Dict[str, Any]:
    return {"tool": "recombination-lab", "version": __version__, "config": config_hash, **extra}


def require(path, stage: str) -> Path:
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(path, stage)
    return path


def write_csv(frame: pd.DataFrame, path, config_hash: str, notes: Sequence[str] = ()) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(header_line(config_hash) + "\n")
        for note in notes:
            f.write(f"# {note}\n")
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"💾 Wrote {path} ({len(frame)} rows)")
    return path


def _comment_rows(path: Path) -> int:
    """Leading `#` lines (artifact header and notes) before the column row"""
    count = 0
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            count += 1
    return count


def read_csv(path, stage: str, dtype: Optional[Dict[str, Any]] = None) -> pd.DataFrame:
    # only empty cells are missing: ids such as "NA" or "007" stay verbatim
    path = require(path, stage)
    return pd.read_csv(path, skiprows=_comment_rows(path), dtype=dtype, keep_default_na=False, na_values=[""])


def write_json(data: Dict[str, Any], path, config_hash: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump({"_meta": meta(config_hash), **data}, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"💾 Wrote {path}")
    return path


def read_json(path, stage: str) -> Dict[str, Any]:
    with open(require(path, stage), "r", encoding="utf-8") as f:
        return json.load(f)


def write_documents(documents: Iterable[Tuple[PatentRecord, Sequence[str]]], path, config_hash: str) -> Path:
    """Chronologically sorted standardized corpus; the first line holds `_meta`"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps({"_meta": meta(config_hash)}, sort_keys=True) + "\n")
        for record, tokens in documents:
            f.write(json.dumps({
                "id": record.patent_id,
                "date": record.filing_date.isoformat(),
                "inventors": list(record.inventor_ids),
                "firm": record.firm_id,
                "ipc_class": record.ipc_class,
                "cites": list(record.cited_ids),
                "tokens": list(tokens),
            }, ensure_ascii=False) + "\n")
            count += 1
    logger.info(f"💾 Wrote {path} ({count} documents)")
    return path


def read_documents(path) -> List[Tuple[PatentRecord, Tuple[str, ...]]]:
    documents = []
    with open(require(path, "ingest"), "r", encoding="utf-8") as f:
        for line in f:
            raw = json.loads(line)
            if "_meta" in raw:
                continue
            record = PatentRecord(
                patent_id=raw["id"],
                filing_date=raw["date"],
                inventor_ids=tuple(raw["inventors"]),
                firm_id=raw["firm"],
                ipc_class=raw["ipc_class"],
                cited_ids=tuple(raw["cites"]),
            )
            documents.append((record, tuple(raw["tokens"])))
    return documents


def metrics_frame(metrics: Sequence[PatentMetrics]) -> pd.DataFrame:
    rows = [{
        "id": m.patent_id,
        "date": m.filing_date.isoformat(),
        "year": m.year,
        "firm": m.firm_id,
        "ipc_class": m.ipc_class,
        "H_p": m.H_p,
        "M_p": m.M_p,
        "W_p": m.W_p,
        "n_p": m.n_p,
        "s_p": m.s_p,
        "Kbar_p": m.Kbar_p,
        "c_p": m.c_p,
        "flag_empty_pairs": int(m.flag_empty_pairs),
    } for m in metrics]
    return pd.DataFrame(rows, columns=METRICS_COLUMNS)


def read_metrics(path) -> pd.DataFrame:
    return read_csv(path, "metrics", dtype={"id": str, "date": str, "firm": str, "ipc_class": str})


def histogram_frame(values, bins: int) -> pd.DataFrame:
    edges, counts = s_histogram(values, bins)
    return pd.DataFrame({"bin_lo": edges[:-1], "bin_hi": edges[1:], "count": counts})


def export_figure_data(output_dir, which: str, config_hash: str, bins: int = 50) -> List[Path]:
    """Plot-ready CSVs for one figure; a missing upstream artifact names the stage to run"""
    output_dir = Path(output_dir)
    if which not in FIGURE_FILES:
        raise DomainError(f"unknown figure '{which}', expected one of {', '.join(FIGURE_FILES)}")
    written: List[Path] = []

    if which in ("fig1", "fig2"):
        outcome = "n_p" if which == "fig1" else "c_p"
        histogram_name, expectation_name, quantiles_name = FIGURE_FILES[which]
        metrics = read_metrics(output_dir / METRICS)
        expectation = read_csv(output_dir / expectation_file(outcome), "regress")
        quantiles = read_csv(output_dir / quantiles_file(outcome), "quantiles")
        sample = metrics[(metrics["H_p"] >= 2) & metrics[outcome].notna()]
        written.append(write_csv(histogram_frame(sample["s_p"], bins), output_dir / histogram_name, config_hash))
        written.append(write_csv(expectation[["s", "fit", "lo95", "hi95"]], output_dir / expectation_name, config_hash))
        written.append(write_csv(quantiles[["tau", "s", "fit"]], output_dir / quantiles_name, config_hash))
    else:
        histogram_name, quantiles_name = FIGURE_FILES[which]
        matches = read_csv(output_dir / MATCHES, "simulate")
        values = read_csv(output_dir / SIM_QUANTILES, "simulate")
        active = matches[matches["active"].astype(bool)]
        written.append(write_csv(histogram_frame(active["s"], bins), output_dir / histogram_name, config_hash))
        written.append(write_csv(values[["tau", "s", "value"]], output_dir / quantiles_name, config_hash))

    logger.info(f"✅ Exported {which} figure data: {', '.join(p.name for p in written)}")
    return written
