from typing import Any, Dict, Iterator, Tuple
import json

from app.errors import MalformedRecordError
from app.ingest.base import BaseReader


class JsonlReader(BaseReader):
    def __init__(self, path):
        super().__init__(path, "jsonl")

    def rows(self) -> Iterator[Tuple[int, Dict[str, Any]]]:
        for line_no, line in enumerate(self._handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as e:
                raise MalformedRecordError(line_no, f"invalid JSON ({e.msg})")
            if not isinstance(raw, dict):
                raise MalformedRecordError(line_no, "expected a JSON object")
            yield line_no, raw
