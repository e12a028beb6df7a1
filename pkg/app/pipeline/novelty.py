"""
Chronological word-pair novelty index.

n_wt = T(t) / df_w(t), where T(t) is the total number of pair slots (sum of W_p)
over documents filed on or before t and df_w(t) the number of those documents
containing pair w. Inclusion is by calendar day, so same-day documents see each other.
"""

from collections import defaultdict
from dataclasses import dataclass
from datetime import date
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple
import logging
import math

import numpy as np

from app.errors import EmptyPairSetError, OrderingError, UnseenPairError
from app.models import PatentNoveltyReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NoveltyIndex:
    """Immutable after build; every query is a binary search over prefix arrays"""

    dates: np.ndarray       # distinct filing dates as proleptic ordinals, ascending
    t_prefix: np.ndarray    # T at each distinct date
    doc_prefix: np.ndarray  # document count at each distinct date
    pair_ptr: np.ndarray    # CSR offsets into pair_dates / pair_cum, length n_pairs + 1
    pair_dates: np.ndarray  # date positions where a pair's df changes
    pair_cum: np.ndarray    # df of the pair at those date positions

    @property
    def n_pairs(self) -> int:
        return len(self.pair_ptr) - 1

    @property
    def n_documents(self) -> int:
        return int(self.doc_prefix[-1]) if len(self.doc_prefix) else 0

    def _date_position(self, t: date) -> int:
        return int(np.searchsorted(self.dates, t.toordinal(), side="right")) - 1

    def total_slots(self, t: date) -> int:
        """T(t)"""
        k = self._date_position(t)
        return int(self.t_prefix[k]) if k >= 0 else 0

    def document_count(self, t: date) -> int:
        k = self._date_position(t)
        return int(self.doc_prefix[k]) if k >= 0 else 0

    def document_frequency(self, pair_id: int, t: date) -> int:
        """df_w(t)"""
        if pair_id < 0 or pair_id >= self.n_pairs:
            return 0
        k = self._date_position(t)
        if k < 0:
            return 0
        lo, hi = int(self.pair_ptr[pair_id]), int(self.pair_ptr[pair_id + 1])
        j = int(np.searchsorted(self.pair_dates[lo:hi], k, side="right")) - 1
        return int(self.pair_cum[lo + j]) if j >= 0 else 0

    def pair_novelty(self, pair_id: int, t: date) -> float:
        return pair_novelty(self, pair_id, t)


def build_index(records: Iterable[Tuple[str, date, FrozenSet[int]]], n_pairs: Optional[int] = None) -> NoveltyIndex:
    """Chronological fold over (patent_id, filing date, pair ids) sorted by date"""
    date_list: List[int] = []
    slots: List[int] = []
    docs: List[int] = []
    # pair id -> [[date position, count], ...]
    per_pair: Dict[int, List[List[int]]] = defaultdict(list)
    previous: Optional[date] = None

    for patent_id, filed, pairs in records:
        if previous is not None and filed < previous:
            raise OrderingError(patent_id, filed, previous)
        if previous is None or filed != previous:
            date_list.append(filed.toordinal())
            slots.append(0)
            docs.append(0)
            previous = filed
        k = len(date_list) - 1
        slots[k] += len(pairs)
        docs[k] += 1
        for pid in pairs:
            runs = per_pair[pid]
            if runs and runs[-1][0] == k:
                runs[-1][1] += 1
            else:
                runs.append([k, 1])

    size = max(per_pair.keys(), default=-1) + 1
    if n_pairs is not None:
        size = max(size, n_pairs)
    ptr = np.zeros(size + 1, dtype=np.int64)
    for pid, runs in per_pair.items():
        ptr[pid + 1] = len(runs)
    np.cumsum(ptr, out=ptr)
    pair_dates = np.zeros(int(ptr[-1]), dtype=np.int64)
    pair_cum = np.zeros(int(ptr[-1]), dtype=np.int64)
    for pid, runs in per_pair.items():
        lo = int(ptr[pid])
        arr = np.asarray(runs, dtype=np.int64)
        pair_dates[lo:lo + len(runs)] = arr[:, 0]
        pair_cum[lo:lo + len(runs)] = np.cumsum(arr[:, 1])

    index = NoveltyIndex(
        dates=np.asarray(date_list, dtype=np.int64),
        t_prefix=np.cumsum(np.asarray(slots, dtype=np.int64)),
        doc_prefix=np.cumsum(np.asarray(docs, dtype=np.int64)),
        pair_ptr=ptr,
        pair_dates=pair_dates,
        pair_cum=pair_cum,
    )
    logger.info(
        f"✅ Built novelty index: {index.n_documents} documents, {len(date_list)} dates, {size} pairs"
    )
    return index


def pair_novelty(index: NoveltyIndex, pair_id: int, t: date) -> float:
    """n_wt = T(t)/df_w(t); raises when the pair has not been filed by t"""
    df = index.document_frequency(pair_id, t)
    if df == 0:
        raise UnseenPairError(f"pair {pair_id} has no documents filed on or before {t}")
    return index.total_slots(t) / df


def patent_novelty(
    index: NoveltyIndex,
    patent_id: str,
    filed: date,
    pairs: FrozenSet[int],
    exclude_focal: bool = False,
) -> PatentNoveltyReport:
    """Mean pair novelty of a document at its own filing date.

    With ``exclude_focal`` the document is removed from both counts; pairs it
    alone contains are skipped and counted in ``skipped_pairs``.
    """
    if not pairs:
        raise EmptyPairSetError(f"patent '{patent_id}' has no word pairs")
    total = index.total_slots(filed)
    ordered = sorted(pairs)
    if not exclude_focal:
        values = [pair_novelty(index, w, filed) for w in ordered]
        skipped = 0
    else:
        numerator = total - len(pairs)
        values = []
        for w in ordered:
            df = index.document_frequency(w, filed) - 1
            if df > 0:
                values.append(numerator / df)
        skipped = len(pairs) - len(values)
        if not values:
            raise EmptyPairSetError(f"patent '{patent_id}' has no pair filed by any other document")
    return PatentNoveltyReport(
        patent_id=patent_id,
        filing_date=filed,
        n_pairs=len(pairs),
        novelty=math.fsum(values) / len(values),
        skipped_pairs=skipped,
    )


class NoveltyCache:
    """Memoizes n_wt for one as-of date; used by the knowledge sweep"""

    def __init__(self, index: NoveltyIndex, t: date):
        self.index = index
        self.t = t
        self._values: Dict[int, float] = {}

    def __call__(self, pair_id: int) -> float:
        value = self._values.get(pair_id)
        if value is None:
            value = pair_novelty(self.index, pair_id, self.t)
            self._values[pair_id] = value
        return value

    def pair_novelty(self, pair_id: int, t: date) -> float:
        if t != self.t:
            return pair_novelty(self.index, pair_id, t)
        return self(pair_id)

