"""
Deterministic synthetic patent corpus.

Stands in for proprietary patent data: firms with inventor pools, IPC classes
with their own topical vocabulary, repeat collaboration and backward citations.
"""

from datetime import date, timedelta
from pathlib import Path
from typing import Dict, List, Sequence
import json
import logging

import numpy as np

from app.models import PatentRecord

logger = logging.getLogger(__name__)

_PREFIXES = ["micro", "nano", "thermo", "electro", "photo", "bio", "hydro", "magneto", "opto", "piezo", "cryo", "aero"]
_ROOTS = [
    "sensor", "circuit", "layer", "membrane", "catalyst", "signal", "module", "valve",
    "lens", "coating", "polymer", "battery", "antenna", "rotor", "filter", "substrate",
    "electrode", "channel", "crystal", "fiber",
]
_VERBS = ["control", "measure", "convert", "detect", "transmit", "deposit", "amplify", "separate", "heat", "store"]
_FILLER = ["the", "a", "of", "and", "wherein", "said", "is", "which", "to", "in"]
_IPC_CODES = ["H01L 21/02", "G06F 17/30", "A61K 31/00", "B01J 23/00", "C08G 59/00",
              "G01N 33/00", "H04L 9/00", "F16K 31/00", "B60L 50/00", "C12N 15/00"]
_TEAM_SIZE_WEIGHTS = [0.15, 0.45, 0.30, 0.10]


def _vocabulary() -> List[str]:
    return [p + r for p in _PREFIXES for r in _ROOTS]


def generate_synthetic_corpus(
    n_patents: int = 500,
    seed: int = 7,
    start_year: int = 2004,
    end_year: int = 2013,
    n_firms: int = 8,
    inventors_per_firm: int = 18,
) -> List[PatentRecord]:
    rng = np.random.default_rng(seed)
    vocab = _vocabulary()
    topics: Dict[str, List[str]] = {
        code: list(rng.choice(vocab, size=30, replace=False)) for code in _IPC_CODES
    }
    firm_classes = {
        f"F{f:02d}": list(rng.choice(len(_IPC_CODES), size=3, replace=False)) for f in range(1, n_firms + 1)
    }
    firm_inventors = {
        firm: [f"{firm}-I{k:03d}" for k in range(1, inventors_per_firm + 1)] for firm in firm_classes
    }

    first_day = date(start_year, 1, 1)
    span = (date(end_year, 12, 31) - first_day).days
    days = np.sort(rng.integers(0, span + 1, size=n_patents))

    records: List[PatentRecord] = []
    for k, offset in enumerate(days):
        firm = f"F{int(rng.integers(1, n_firms + 1)):02d}"
        ipc = _IPC_CODES[int(rng.choice(firm_classes[firm]))]
        team_size = int(rng.choice(len(_TEAM_SIZE_WEIGHTS), p=_TEAM_SIZE_WEIGHTS)) + 1
        # a narrow slice of the firm pool drives repeat collaboration
        pool = firm_inventors[firm]
        anchor = int(rng.integers(0, len(pool)))
        window = [pool[(anchor + d) % len(pool)] for d in range(6)]
        inventors = list(rng.choice(window, size=team_size, replace=False))
        if rng.random() < 0.1:
            other = f"F{int(rng.integers(1, n_firms + 1)):02d}"
            inventors.append(str(rng.choice(firm_inventors[other])))

        records.append(
            PatentRecord(
                patent_id=f"P{k + 1:05d}",
                filing_date=first_day + timedelta(days=int(offset)),
                abstract=_abstract(rng, topics[ipc], vocab),
                inventor_ids=tuple(str(i) for i in inventors),
                firm_id=firm,
                ipc_class=ipc[:3],
                cited_ids=tuple(_citations(rng, records)),
            )
        )
    logger.info(f"🧪 Generated {len(records)} synthetic patents ({start_year}-{end_year})")
    return records


def _abstract(rng: np.random.Generator, topic: Sequence[str], vocab: Sequence[str]) -> str:
    n_topic = int(rng.integers(4, 9))
    # Zipf-like weights concentrate documents on a topic's leading words
    weights = 1.0 / np.arange(1, len(topic) + 1)
    weights /= weights.sum()
    words = list(rng.choice(topic, size=n_topic, replace=False, p=weights))
    words += list(rng.choice(vocab, size=int(rng.integers(0, 3))))
    words += list(rng.choice(_VERBS, size=2, replace=False))
    words += [f"{w}s" for w in rng.choice(words, size=1)]
    words += list(rng.choice(_FILLER, size=4))
    words.append(str(int(rng.integers(1, 100))))
    rng.shuffle(words)
    return " ".join(words).capitalize() + "."


def _citations(rng: np.random.Generator, earlier: Sequence[PatentRecord]) -> List[str]:
    if not earlier:
        return []
    n_cites = min(len(earlier), int(rng.integers(0, 4)))
    if n_cites == 0:
        return []
    recent = earlier[-150:]
    picks = rng.choice(len(recent), size=n_cites, replace=False)
    return sorted(recent[int(i)].patent_id for i in picks)


def write_jsonl(records: Sequence[PatentRecord], path) -> Path:
    """Write records in the patents.jsonl wire format"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for r in records:
            f.write(json.dumps({
                "id": r.patent_id,
                "date": r.filing_date.isoformat(),
                "abstract": r.abstract,
                "inventors": list(r.inventor_ids),
                "firm": r.firm_id,
                "ipc": r.ipc_class,
                "cites": list(r.cited_ids),
            }) + "\n")
    return path
