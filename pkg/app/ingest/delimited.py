from typing import Any, Dict, Iterator, Tuple
import csv

from app.errors import MalformedRecordError
from app.ingest.base import BaseReader

CSV_COLUMNS = ("id", "date", "abstract", "inventors", "firm", "ipc", "cites")
LIST_SEPARATOR = ";"


class CsvReader(BaseReader):
    """Header row required; `inventors` and `cites` hold ';'-separated ids"""

    def __init__(self, path):
        super().__init__(path, "csv")

    def rows(self) -> Iterator[Tuple[int, Dict[str, Any]]]:
        reader = csv.DictReader(self._handle)
        if reader.fieldnames is None:
            return
        missing = [c for c in CSV_COLUMNS[:-1] if c not in reader.fieldnames]
        if missing:
            raise MalformedRecordError(1, f"header lacks column(s) {', '.join(missing)}")
        for row in reader:
            line_no = reader.line_num
            if None in row:
                raise MalformedRecordError(line_no, "more fields than header columns")
            raw: Dict[str, Any] = dict(row)
            raw["inventors"] = self._split(row.get("inventors"))
            raw["cites"] = self._split(row.get("cites"))
            yield line_no, raw

    @staticmethod
    def _split(value) -> list:
        if not value:
            return []
        return [part.strip() for part in value.split(LIST_SEPARATOR) if part.strip()]
