from datetime import date

import pytest

from app.errors import SingleInventorError
from app.models import PairConvention, PatentRecord
from app.pipeline.citations import CitationIndex, add_years, citation_metric


def _record(patent_id, filed, inventors, cites=()):
    return PatentRecord(patent_id=patent_id, filing_date=filed, inventor_ids=tuple(inventors), cited_ids=tuple(cites))


@pytest.fixture
def focal():
    return _record("P", date(2004, 2, 29), ["A", "B"])


def test_add_years_falls_back_on_leap_day():
    assert add_years(date(2004, 2, 29), 5) == date(2009, 2, 28)
    assert add_years(date(2004, 2, 29), 4) == date(2008, 2, 29)
    assert add_years(date(2004, 3, 1), 5) == date(2009, 3, 1)


def test_window_is_inclusive_at_both_ends(focal):
    citing = [
        _record("Q1", date(2004, 2, 29), ["C"], ["P"]),
        _record("Q2", date(2009, 2, 28), ["D"], ["P"]),
        _record("Q3", date(2009, 3, 1), ["E"], ["P"]),
        _record("Q4", date(2004, 1, 1), ["F"], ["P"]),
    ]
    index = CitationIndex.from_records([focal] + citing)
    assert index.citation_count(focal) == 2


def test_self_citations_are_excluded(focal):
    citing = [
        _record("Q1", date(2005, 1, 1), ["B", "Z"], ["P"]),
        _record("Q2", date(2005, 1, 1), ["Y"], ["P", "P"]),
    ]
    index = CitationIndex.from_records(citing)
    assert index.citation_count(focal) == 1


def test_unknown_citing_inventors_count(focal):
    index = CitationIndex()
    index.add("P", "Q", date(2006, 1, 1))
    assert index.citation_count(focal) == 1


def test_citation_metric_divides_by_pair_count(focal):
    citing = [_record(f"Q{k}", date(2005, 1, 1), [f"X{k}"], ["P"]) for k in range(3)]
    index = CitationIndex.from_records(citing)
    assert citation_metric(index, focal) == pytest.approx(3 / 2)
    assert citation_metric(index, focal, convention=PairConvention.UNORDERED) == pytest.approx(3.0)
    assert citation_metric(index, focal, window_years=0) == 0.0


def test_single_inventor_citation_metric_raises():
    solo = _record("S", date(2004, 1, 1), ["A"])
    with pytest.raises(SingleInventorError):
        citation_metric(CitationIndex(), solo)
