from abc import ABC, abstractmethod
from datetime import date
from pathlib import Path
from typing import Any, Dict, Iterator, List, Tuple
from pydantic import ValidationError
import logging

from app.errors import DateParseError, DuplicatePatentError, InputError, MalformedRecordError
from app.models import PatentRecord

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ("id", "date", "abstract", "inventors", "firm", "ipc")
IPC_CLASS_LENGTH = 3


class BaseReader(ABC):
    """Reads patent records from one input file; subclasses handle the wire format"""

    def __init__(self, path, source_format: str):
        self.path = Path(path)
        self.source_format = source_format
        self._handle = None

    def __enter__(self):
        if not self.path.is_file():
            raise InputError(f"input file not found: {self.path}")
        self._handle = open(self.path, "r", encoding="utf-8", newline="")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self._handle:
            self._handle.close()
            self._handle = None

    @abstractmethod
    def rows(self) -> Iterator[Tuple[int, Dict[str, Any]]]:
        """Yield (line number, raw field mapping) pairs in file order"""

    def parse(self) -> List[PatentRecord]:
        """Parse every row, rejecting duplicate ids"""
        records: List[PatentRecord] = []
        seen = set()
        for line, raw in self.rows():
            record = self._to_record(raw, line)
            if record.patent_id in seen:
                raise DuplicatePatentError(record.patent_id, line)
            seen.add(record.patent_id)
            records.append(record)
        logger.info(f"✅ Parsed {len(records)} {self.source_format} records from {self.path}")
        return records

    def _to_record(self, raw: Dict[str, Any], line: int) -> PatentRecord:
        missing = [name for name in REQUIRED_FIELDS if raw.get(name) is None]
        if missing:
            raise MalformedRecordError(line, f"missing field(s) {', '.join(missing)}")
        inventors = raw["inventors"]
        if isinstance(inventors, str) or not isinstance(inventors, (list, tuple)):
            raise MalformedRecordError(line, "'inventors' must be a list of ids")
        cites = raw.get("cites") or []
        if isinstance(cites, str) or not isinstance(cites, (list, tuple)):
            raise MalformedRecordError(line, "'cites' must be a list of ids")
        try:
            return PatentRecord(
                patent_id=str(raw["id"]),
                filing_date=self._parse_date(raw["date"], line),
                abstract=str(raw["abstract"]),
                inventor_ids=tuple(str(i) for i in inventors),
                firm_id=str(raw["firm"]),
                ipc_class=str(raw["ipc"]).strip()[:IPC_CLASS_LENGTH],
                cited_ids=tuple(str(c) for c in cites),
            )
        except ValidationError as e:
            reason = "; ".join(err["msg"] for err in e.errors())
            raise MalformedRecordError(line, reason) from e

    def _parse_date(self, value: Any, line: int) -> date:
        """Parse an ISO-8601 calendar date (YYYY-MM-DD)"""
        if isinstance(value, date):
            return value
        try:
            return date.fromisoformat(str(value).strip())
        except ValueError:
            raise DateParseError(line, str(value))
