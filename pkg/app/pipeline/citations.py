from collections import defaultdict
from datetime import date
from typing import Dict, Iterable, List, Tuple
import calendar

from app.errors import SingleInventorError
from app.models import PairConvention, PatentRecord


def add_years(d: date, years: int) -> date:
    """Same month/day `years` later; Feb 29 falls back to Feb 28"""
    year = d.year + years
    day = min(d.day, calendar.monthrange(year, d.month)[1])
    return d.replace(year=year, day=day)


class CitationIndex:
    """Incoming citations per cited patent, from the `cites` lists of citing records"""

    def __init__(self):
        self._cited_by: Dict[str, List[Tuple[str, date, frozenset]]] = defaultdict(list)

    @classmethod
    def from_records(cls, records: Iterable[PatentRecord]) -> "CitationIndex":
        index = cls()
        for q in records:
            for cited in set(q.cited_ids):
                index.add(cited, q.patent_id, q.filing_date, q.inventor_ids)
        return index

    def add(self, cited_id: str, citing_id: str, citing_date: date, citing_inventors: Iterable[str] = ()):
        # an empty inventor set means unknown inventors: never a self-citation
        self._cited_by[cited_id].append((citing_id, citing_date, frozenset(citing_inventors)))

    def citation_count(self, p: PatentRecord, window_years: int = 5) -> int:
        """c-bar: citing documents filed within the window, excluding inventor-overlapping ones"""
        inventors = frozenset(p.inventor_ids)
        horizon = add_years(p.filing_date, window_years)
        return sum(
            1
            for citing_id, filed, citing_inventors in self._cited_by.get(p.patent_id, ())
            if citing_id != p.patent_id
            and p.filing_date <= filed <= horizon
            and not (inventors & citing_inventors)
        )


def citation_metric(
    citations: CitationIndex,
    p: PatentRecord,
    window_years: int = 5,
    convention: PairConvention = PairConvention.ORDERED,
) -> float:
    """c_p = c-bar / M_p"""
    pair_count = convention.pair_count(len(p.inventor_ids))
    if pair_count < 1:
        raise SingleInventorError(f"patent '{p.patent_id}' has a single inventor (M_p = 0)")
    return citations.citation_count(p, window_years) / pair_count
