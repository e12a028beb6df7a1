"""
Pipeline stages: ingest -> index -> metrics -> regress -> quantiles, plus the
simulation. Each stage reads its upstream artifacts from the output directory
and writes its own.
"""

from collections import Counter
from pathlib import Path
from typing import Callable, Dict, List, Optional, TypeVar
import logging

import pandas as pd

from app import exports
from app.analysis.curves import conditional_expectation_curve, s_grid
from app.analysis.quantile import quantile_curves
from app.analysis.regression import MAX_ORDER, RegressionSpec, select_order_bic
from app.config import PipelineConfig, config_hash
from app.errors import InputError, RecombinationError
from app.ingest.corpus import PreparedPatent, parse_patent_file, prepare_corpus, sort_chronologically
from app.ingest.pairs import PairInterner, extract_word_pairs
from app.ingest.text import StandardizationConfig
from app.models import Outcome
from app.pipeline.citations import CitationIndex
from app.pipeline.knowledge import KnowledgeSweep
from app.pipeline.novelty import build_index, patent_novelty
from app.pipeline.snapshot import load_snapshot, save_snapshot
from app.simulation.model import ValueModel
from app.simulation.runner import run_simulation

logger = logging.getLogger(__name__)

T = TypeVar("T")


class PipelineRunner:
    def __init__(self, config: PipelineConfig, output_dir, threads: int = 1):
        self.config = config
        self.output_dir = Path(output_dir)
        self.threads = max(1, threads)
        self.config_hash = config_hash(config)

    def _path(self, name: str) -> Path:
        return self.output_dir / name

    def _stage(self, name: str, work: Callable[[], T]) -> T:
        logger.info(f"🚀 Stage '{name}' starting")
        try:
            result = work()
        except RecombinationError as e:
            logger.error(f"❌ {name} failed: {e}")
            e.failed_stage = name
            raise
        logger.info(f"✅ Stage '{name}' finished")
        return result

    # ingest

    def ingest(self, input_path: Optional[str] = None) -> List[PreparedPatent]:
        return self._stage("ingest", lambda: self._ingest(input_path))

    def _ingest(self, input_path: Optional[str]) -> List[PreparedPatent]:
        cfg = self.config.ingest
        records = parse_patent_file(input_path or cfg.input_path, cfg.format)
        burn_in = self.config.novelty.burn_in_start
        if burn_in is not None:
            kept = [r for r in records if r.filing_date >= burn_in]
            if len(kept) < len(records):
                logger.info(f"📋 Dropped {len(records) - len(kept)} records filed before {burn_in}")
            records = kept
        records = sorted(records, key=lambda r: r.filing_date)
        standardization = StandardizationConfig.from_files(cfg.stopwords_path, cfg.lemmas_path, cfg.suffix_rules)
        prepared = prepare_corpus(records, standardization, PairInterner(), self.threads)
        exports.write_documents(((p.record, p.tokens) for p in prepared), self._path(exports.DOCUMENTS), self.config_hash)
        return prepared

    # index

    def _load_documents(self, interner: PairInterner) -> List[PreparedPatent]:
        documents = exports.read_documents(self._path(exports.DOCUMENTS))
        prepared = [
            PreparedPatent(record=record, tokens=tokens, pairs=interner.intern_all(extract_word_pairs(tokens)))
            for record, tokens in documents
        ]
        return sort_chronologically(prepared)

    def index(self):
        return self._stage("index", self._index)

    def _index(self):
        interner = PairInterner()
        prepared = self._load_documents(interner)
        index = build_index(
            ((p.record.patent_id, p.record.filing_date, p.pairs) for p in prepared),
            n_pairs=len(interner),
        )
        save_snapshot(index, interner, self._path(exports.SNAPSHOT), exports.meta(self.config_hash))

        exclude_focal = self.config.novelty.exclude_focal
        rows = []
        for p in prepared:
            if not p.pairs or p.record.filing_date < self.config.novelty.analysis_start:
                continue
            try:
                report = patent_novelty(index, p.record.patent_id, p.record.filing_date, p.pairs, exclude_focal)
            except RecombinationError as e:
                logger.warning(f"⚠️ No novelty for {p.record.patent_id}: {e}")
                continue
            rows.append({
                "id": report.patent_id,
                "date": report.filing_date.isoformat(),
                "W_p": report.n_pairs,
                "novelty": report.novelty,
                "skipped_pairs": report.skipped_pairs,
            })
        columns = exports.ARTIFACTS[exports.NOVELTY][1].split(",")
        if exclude_focal:
            columns.append("skipped_pairs")
        frame = pd.DataFrame(rows, columns=columns)
        exports.write_csv(frame, self._path(exports.NOVELTY), self.config_hash)
        return index, interner

    # metrics

    def metrics(self) -> pd.DataFrame:
        return self._stage("metrics", self._metrics)

    def _metrics(self) -> pd.DataFrame:
        index, interner, snapshot_meta = load_snapshot(exports.require(self._path(exports.SNAPSHOT), "index"))
        if snapshot_meta.get("config") != self.config_hash:
            logger.warning("⚠️ Index snapshot was written under a different config; re-run 'index' to refresh it")
        prepared = self._load_documents(interner)

        cfg = self.config.metrics
        citations = CitationIndex.from_records(p.record for p in prepared) if cfg.compute_citations else None
        sweep = KnowledgeSweep(
            index,
            convention=cfg.pair_convention,
            analysis_start=self.config.novelty.analysis_start,
            citations=citations,
            citation_window_years=cfg.citation_window_years,
            exclude_focal=self.config.novelty.exclude_focal,
            threads=self.threads,
        )
        frame = exports.metrics_frame(sweep.run(prepared))
        exports.write_csv(frame, self._path(exports.METRICS), self.config_hash)
        return frame

    # econometrics

    def _firm_filings(self) -> Optional[Dict[str, int]]:
        documents = self._path(exports.DOCUMENTS)
        if not documents.is_file():
            logger.warning(f"⚠️ {exports.DOCUMENTS} not found; firm pooling counts the regression sample")
            return None
        return dict(Counter(record.firm_id for record, _ in exports.read_documents(documents)))

    def _regression_spec(self, outcome: Outcome) -> RegressionSpec:
        cfg = self.config.regression
        return RegressionSpec(
            outcome=outcome,
            order=min(cfg.max_order, MAX_ORDER),
            firm_threshold=cfg.firm_threshold,
            absorb_tol=cfg.absorb_tol,
            absorb_max_iter=cfg.absorb_max_iter,
            firm_filings=self._firm_filings(),
        )

    def _read_metrics(self, outcome: Outcome) -> pd.DataFrame:
        frame = exports.read_metrics(self._path(exports.METRICS))
        if outcome is Outcome.CITATIONS and frame["c_p"].isna().all():
            raise InputError("patent_metrics.csv has no c_p values; enable metrics.compute_citations and re-run 'metrics'")
        return frame

    def regress(self, outcome: Outcome = Outcome.NOVELTY):
        return self._stage("regress", lambda: self._regress(Outcome(outcome)))

    def _regress(self, outcome: Outcome):
        frame = self._read_metrics(outcome)
        spec = self._regression_spec(outcome)
        selection = select_order_bic(frame, spec, range(1, spec.order + 1), self.threads)
        fit = selection.best
        curve = conditional_expectation_curve(fit, s_grid(self.config.regression.grid_points))

        exports.write_json({
            "chosen_order": selection.chosen,
            "bic_table": {str(order): bic for order, bic in selection.table.items()},
            "fit": fit.to_dict(),
            "fixed_effect_levels": fit.effects,
            "curve_convention": curve.convention,
        }, self._path(exports.fit_file(outcome.value)), self.config_hash)
        exports.write_csv(
            pd.DataFrame({"s": curve.grid, "fit": curve.fit, "lo95": curve.lower, "hi95": curve.upper}),
            self._path(exports.expectation_file(outcome.value)),
            self.config_hash,
            notes=[f"order={selection.chosen} convention={curve.convention}"],
        )
        return selection

    def quantiles(self, outcome: Outcome = Outcome.NOVELTY, order: Optional[int] = None):
        return self._stage("quantiles", lambda: self._quantiles(Outcome(outcome), order))

    def _quantiles(self, outcome: Outcome, order: Optional[int]):
        frame = self._read_metrics(outcome)
        if order is None:
            fit_path = self._path(exports.fit_file(outcome.value))
            order = int(exports.read_json(fit_path, "regress")["chosen_order"]) if fit_path.is_file() else 4
        cfg = self.config.quantiles
        taus = cfg.novelty_taus if outcome is Outcome.NOVELTY else cfg.citation_taus
        spec = self._regression_spec(outcome).with_order(order)
        curves = quantile_curves(
            frame, spec, taus, s_grid(self.config.regression.grid_points), cfg.tol, cfg.max_iter, self.threads,
        )
        notes = [
            f"order={order} fixed effects as indicator columns at sample means",
            f"firm_count_basis={spec.firm_count_basis}",
        ]
        if curves.degenerate:
            notes.append("degenerate_taus=" + ",".join(str(t) for t in curves.degenerate))
        exports.write_csv(
            pd.DataFrame(curves.rows(), columns=["tau", "s", "fit"]),
            self._path(exports.quantiles_file(outcome.value)),
            self.config_hash,
            notes=notes,
        )
        return curves

    # simulation

    def simulate(self, from_fit: Optional[str] = None):
        return self._stage("simulate", lambda: self._simulate(from_fit))

    def _simulate(self, from_fit: Optional[str]):
        sim = self.config.simulation
        model = ValueModel.from_config(sim)
        if from_fit:
            fitted = exports.read_json(from_fit, "regress")
            order = int(fitted["chosen_order"])
            coefficients = fitted["fit"]["coefficients"]
            model = ValueModel(v0=sim.v0, c0=sim.c0, coefficients=tuple(coefficients[f"s^{k}"] for k in range(1, order + 1)))
            logger.info(f"📂 Value polynomial of order {order} taken from {from_fit}")

        result = run_simulation(sim, model, self.threads)
        matches = pd.DataFrame([r.model_dump() for r in result.records], columns=exports.ARTIFACTS[exports.MATCHES][1].split(","))
        tie_break = "surplus,pair_id" if sim.surplus_tie_break else "pair_id"
        exports.write_csv(matches, self._path(exports.MATCHES), self.config_hash, notes=[f"tie_break={tie_break}"])

        summary = result.summary
        exports.write_csv(pd.DataFrame([
            ("seed", sim.seed),
            ("n_categories", summary.n_categories),
            ("agents_per_category", sim.agents_per_category),
            ("knowledge_size", sim.knowledge_size),
            ("n_matches", summary.n_matches),
            ("n_active", summary.n_active),
            ("mean_s", summary.mean_s),
            ("value_order", len(model.coefficients)),
        ], columns=["metric", "value"]), self._path(exports.SIM_SUMMARY), self.config_hash)

        rows = [(tau, float(s), float(v)) for tau, values in summary.value_curves.items()
                for s, v in zip(summary.grid, values)]
        notes = ["degenerate_taus=" + ",".join(str(t) for t in summary.degenerate)] if summary.degenerate else []
        exports.write_csv(
            pd.DataFrame(rows, columns=["tau", "s", "value"]), self._path(exports.SIM_QUANTILES), self.config_hash, notes,
        )
        return result

    # figure data

    def export(self, which: str):
        return self._stage(
            "export-figure-data",
            lambda: exports.export_figure_data(self.output_dir, which, self.config_hash, self.config.export.histogram_bins),
        )

    def run(self, input_path: Optional[str] = None) -> Dict[str, object]:
        """ingest -> index -> metrics -> regress -> quantiles on the novelty outcome"""
        self.ingest(input_path)
        self.index()
        self.metrics()
        selection = self.regress(Outcome.NOVELTY)
        self.quantiles(Outcome.NOVELTY, selection.chosen)
        return {"chosen_order": selection.chosen, "output_dir": str(self.output_dir)}


def run_pipeline(config: PipelineConfig, output_dir, threads: int = 1, input_path: Optional[str] = None) -> Dict[str, object]:
    return PipelineRunner(config, output_dir, threads).run(input_path)
