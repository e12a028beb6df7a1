from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import FrozenSet, List, Sequence, Tuple
import logging

from app.errors import InputError
from app.ingest.delimited import CsvReader
from app.ingest.jsonl import JsonlReader
from app.ingest.pairs import PairInterner, extract_word_pairs
from app.ingest.text import StandardizationConfig, standardize_text
from app.models import InputFormat, PatentRecord

logger = logging.getLogger(__name__)

READERS = {
    InputFormat.JSONL: JsonlReader,
    InputFormat.CSV: CsvReader,
}


def parse_patent_file(path, format: InputFormat = InputFormat.JSONL) -> List[PatentRecord]:
    """Parse a patent file in file order; duplicates and bad lines raise input errors"""
    try:
        reader_cls = READERS[InputFormat(format)]
    except ValueError:
        raise InputError(f"unsupported input format '{format}'")
    with reader_cls(path) as reader:
        return reader.parse()


@dataclass(frozen=True)
class PreparedPatent:
    record: PatentRecord
    tokens: Tuple[str, ...]
    pairs: FrozenSet[int]

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)


def prepare_corpus(
    records: Sequence[PatentRecord],
    config: StandardizationConfig,
    interner: PairInterner,
    threads: int = 1,
) -> List[PreparedPatent]:
    """Standardize abstracts (in parallel) and intern each document's pair set (in record order)"""

    def _tokens(record: PatentRecord) -> Tuple[str, ...]:
        return tuple(standardize_text(record.abstract, config))

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        token_lists = list(pool.map(_tokens, records))

    prepared = []
    for record, tokens in zip(records, token_lists):
        pairs = interner.intern_all(extract_word_pairs(tokens))
        prepared.append(PreparedPatent(record=record, tokens=tokens, pairs=pairs))

    empty = sum(1 for p in prepared if not p.pairs)
    if empty:
        logger.warning(f"⚠️ {empty} documents have fewer than two distinct words (W_p = 0)")
    logger.info(f"✅ Prepared {len(prepared)} documents, {len(interner)} distinct word pairs")
    return prepared


def sort_chronologically(prepared: Sequence[PreparedPatent]) -> List[PreparedPatent]:
    """Stable sort by filing date; same-day documents keep file order"""
    return sorted(prepared, key=lambda p: p.record.filing_date)
