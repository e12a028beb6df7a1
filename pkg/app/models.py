from pydantic import BaseModel, ConfigDict, Field, field_validator
from datetime import date
from typing import Optional, Tuple
from enum import Enum


class InputFormat(str, Enum):
    JSONL = "jsonl"
    CSV = "csv"


class PairConvention(str, Enum):
    ORDERED = "ordered"
    UNORDERED = "unordered"

    def pair_count(self, inventors: int) -> int:
        """M_p for a team of the given size"""
        ordered = inventors * (inventors - 1)
        return ordered if self is PairConvention.ORDERED else ordered // 2


class Outcome(str, Enum):
    NOVELTY = "n_p"
    CITATIONS = "c_p"


class PatentRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    patent_id: str = Field(min_length=1)
    filing_date: date
    abstract: str = ""
    inventor_ids: Tuple[str, ...]
    firm_id: str = ""
    ipc_class: str = ""
    cited_ids: Tuple[str, ...] = ()

    @field_validator("inventor_ids")
    @classmethod
    def _distinct_inventors(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        inventors = tuple(sorted(set(value)))
        if not inventors:
            raise ValueError("inventor_ids must not be empty")
        return inventors

    @property
    def year(self) -> int:
        return self.filing_date.year


class PatentNoveltyReport(BaseModel):
    patent_id: str
    filing_date: date
    n_pairs: int  # W_p
    novelty: float
    skipped_pairs: int = 0  # only non-zero with focal exclusion


class PatentMetrics(BaseModel):
    patent_id: str
    filing_date: date
    year: int
    firm_id: str
    ipc_class: str
    H_p: int
    M_p: int
    W_p: int
    novelty: float
    n_p: float
    s_p: float
    Kbar_p: float
    c_p: Optional[float] = None
    flag_empty_pairs: bool = False


class MatchRecord(BaseModel):
    category: int
    i: int
    j: int
    s: float
    gross: float
    cost: float
    A: float
    active: bool
