"""
Inventor knowledge and knowledge differentiation.

An inventor's knowledge at t is the union of the word pairs of every document
they filed strictly before t. Differentiation between two inventors is the
geometric mean of their one-sided differentiated novelty shares of the union.
"""

from bisect import bisect_left
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date
from itertools import combinations, groupby
from typing import Dict, FrozenSet, Iterable, List, Optional, Protocol, Sequence, Set, Tuple
import logging
import math

from app.errors import EmptyPairSetError, NestingViolationError, SingleInventorError, UndefinedDifferentiationError
from app.ingest.corpus import PreparedPatent
from app.models import PairConvention, PatentMetrics
from app.pipeline.citations import CitationIndex
from app.pipeline.novelty import NoveltyCache, NoveltyIndex, patent_novelty

logger = logging.getLogger(__name__)


class PairNovelty(Protocol):
    def pair_novelty(self, pair_id: int, t: date) -> float: ...


class UniformNovelty:
    """Every pair equally novel; the setting of the collaboration model"""

    def __init__(self, value: float = 1.0):
        self.value = value

    def pair_novelty(self, pair_id: int, t: date) -> float:
        return self.value


@dataclass(frozen=True)
class KnowledgeSet:
    owner: str
    as_of: date
    pairs: FrozenSet[int]
    mass: float  # k_it

    @classmethod
    def build(cls, owner: str, as_of: date, pairs: Iterable[int], novelty: PairNovelty) -> "KnowledgeSet":
        pairs = frozenset(pairs)
        mass = math.fsum(novelty.pair_novelty(w, as_of) for w in pairs)
        return cls(owner=owner, as_of=as_of, pairs=pairs, mass=mass)

    @property
    def size(self) -> int:
        return len(self.pairs)

    def __bool__(self) -> bool:
        return bool(self.pairs)


class ParticipationHistory:
    """Per-inventor, date-sorted list of (filing date, pair ids) participations"""

    def __init__(self):
        self._records: Dict[str, List[Tuple[date, FrozenSet[int]]]] = defaultdict(list)
        self._sorted = True

    @classmethod
    def from_patents(cls, patents: Iterable[PreparedPatent]) -> "ParticipationHistory":
        history = cls()
        for p in patents:
            history.add(p.record.inventor_ids, p.record.filing_date, p.pairs)
        return history

    def add(self, inventors: Iterable[str], filed: date, pairs: FrozenSet[int]):
        for inventor in inventors:
            self._records[inventor].append((filed, pairs))
        self._sorted = False

    def before(self, inventor: str, t: date) -> List[FrozenSet[int]]:
        if not self._sorted:
            for records in self._records.values():
                records.sort(key=lambda r: r[0])
            self._sorted = True
        records = self._records.get(inventor, [])
        cut = bisect_left([filed for filed, _ in records], t)
        return [pairs for _, pairs in records[:cut]]


def inventor_knowledge(history: ParticipationHistory, inventor: str, t: date, novelty: PairNovelty) -> KnowledgeSet:
    """K_it: union of pair sets of participations filed strictly before t"""
    pairs: Set[int] = set()
    for contribution in history.before(inventor, t):
        pairs |= contribution
    return KnowledgeSet.build(inventor, t, pairs, novelty)


def pair_differentiation(novelty: PairNovelty, ki: KnowledgeSet, kj: KnowledgeSet, t: date) -> float:
    """s_ijt = sqrt(k^D_ij * k^D_ji) / k_ij, in [0, 0.5]"""
    if not ki.pairs and not kj.pairs:
        raise UndefinedDifferentiationError(f"both {ki.owner} and {kj.owner} have empty knowledge at {t}")
    weight = lambda w: novelty.pair_novelty(w, t)
    only_i = math.fsum(weight(w) for w in ki.pairs - kj.pairs)
    only_j = math.fsum(weight(w) for w in kj.pairs - ki.pairs)
    union = math.fsum(weight(w) for w in ki.pairs | kj.pairs)
    return min(0.5, math.sqrt(only_i * only_j) / union)


def nesting_witness(sets: Sequence[KnowledgeSet]) -> List[int]:
    """Indices ordering the sets into an inclusion chain (smallest first).

    Raises NestingViolationError with the first non-nested neighbours otherwise.
    """
    order = sorted(range(len(sets)), key=lambda k: (sets[k].size, k))
    for a, b in zip(order, order[1:]):
        if not sets[a].pairs <= sets[b].pairs:
            raise NestingViolationError(a, b)
    return order


def compute_patent_metrics(
    index: NoveltyIndex,
    patent: PreparedPatent,
    knowledge: Sequence[KnowledgeSet],
    novelty: PairNovelty,
    convention: PairConvention = PairConvention.ORDERED,
    citations: Optional[CitationIndex] = None,
    citation_window_years: int = 5,
    exclude_focal: bool = False,
) -> PatentMetrics:
    record = patent.record
    team = len(record.inventor_ids)
    if team < 2:
        raise SingleInventorError(f"patent '{record.patent_id}' has a single inventor")
    if not patent.pairs:
        raise EmptyPairSetError(f"patent '{record.patent_id}' has no word pairs")

    pair_count = convention.pair_count(team)
    report = patent_novelty(index, record.patent_id, record.filing_date, patent.pairs, exclude_focal)

    # s is symmetric, so the unordered mean equals the ordered-pair mean
    values = []
    empty_pairs = 0
    for ki, kj in combinations(knowledge, 2):
        if not ki.pairs and not kj.pairs:
            empty_pairs += 1
            values.append(0.0)
        else:
            values.append(pair_differentiation(novelty, ki, kj, record.filing_date))

    c_p = None
    if citations is not None:
        c_p = citations.citation_count(record, citation_window_years) / pair_count

    return PatentMetrics(
        patent_id=record.patent_id,
        filing_date=record.filing_date,
        year=record.year,
        firm_id=record.firm_id,
        ipc_class=record.ipc_class,
        H_p=team,
        M_p=pair_count,
        W_p=patent.n_pairs,
        novelty=report.novelty,
        n_p=report.novelty / pair_count,
        s_p=math.fsum(values) / len(values),
        Kbar_p=sum(k.size for k in knowledge) / team,
        c_p=c_p,
        flag_empty_pairs=empty_pairs > 0,
    )


def patent_metrics(
    index: NoveltyIndex,
    history: ParticipationHistory,
    patent: PreparedPatent,
    convention: PairConvention = PairConvention.ORDERED,
    citations: Optional[CitationIndex] = None,
    citation_window_years: int = 5,
) -> PatentMetrics:
    """Team metrics of one document from the participation history"""
    t = patent.record.filing_date
    cache = NoveltyCache(index, t)
    knowledge = [inventor_knowledge(history, i, t, cache) for i in patent.record.inventor_ids]
    return compute_patent_metrics(index, patent, knowledge, cache, convention, citations, citation_window_years)


class KnowledgeSweep:
    """Chronological sweep: each date's documents are measured against the
    knowledge state of earlier dates, then merged into their inventors' sets."""

    def __init__(
        self,
        index: NoveltyIndex,
        convention: PairConvention = PairConvention.ORDERED,
        analysis_start: Optional[date] = None,
        citations: Optional[CitationIndex] = None,
        citation_window_years: int = 5,
        exclude_focal: bool = False,
        threads: int = 1,
    ):
        self.index = index
        self.convention = convention
        self.analysis_start = analysis_start
        self.citations = citations
        self.citation_window_years = citation_window_years
        self.exclude_focal = exclude_focal
        self.threads = max(1, threads)
        self.knowledge: Dict[str, Set[int]] = defaultdict(set)
        self.skipped: Dict[str, int] = defaultdict(int)

    def run(self, patents: Sequence[PreparedPatent]) -> List[PatentMetrics]:
        results: List[PatentMetrics] = []
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            for filed, group in groupby(patents, key=lambda p: p.record.filing_date):
                group = list(group)
                if self.analysis_start is None or filed >= self.analysis_start:
                    cache = NoveltyCache(self.index, filed)
                    for metrics, reason in pool.map(lambda p: self._measure(p, cache), group):
                        if metrics is not None:
                            results.append(metrics)
                        else:
                            self.skipped[reason] += 1
                for p in group:
                    for inventor in p.record.inventor_ids:
                        self.knowledge[inventor] |= p.pairs

        for reason, count in sorted(self.skipped.items()):
            logger.warning(f"⚠️ Excluded {count} patents: {reason}")
        logger.info(f"✅ Computed metrics for {len(results)} patents, {len(self.knowledge)} inventors tracked")
        return results

    def _measure(self, patent: PreparedPatent, cache: NoveltyCache) -> Tuple[Optional[PatentMetrics], str]:
        record = patent.record
        if len(record.inventor_ids) < 2:
            return None, "single inventor"
        if not patent.pairs:
            return None, "no word pairs"
        knowledge = [
            KnowledgeSet.build(i, record.filing_date, self.knowledge.get(i, ()), cache)
            for i in record.inventor_ids
        ]
        try:
            return compute_patent_metrics(
                self.index, patent, knowledge, cache, self.convention,
                self.citations, self.citation_window_years, self.exclude_focal,
            ), ""
        except EmptyPairSetError:
            return None, "no pair seen outside the focal patent"
