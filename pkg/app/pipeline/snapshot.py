"""
Binary snapshot of the novelty index and its intern table.

Layout (little endian):
    magic b"RLNI" | uint32 version | uint32 header length | JSON header |
    .npy arrays: dates, t_prefix, doc_prefix, pair_ptr, pair_dates, pair_cum, pair_words
The JSON header carries the word table, counts and the writing config hash.
"""

from pathlib import Path
from typing import Any, Dict, Optional, Tuple
import json
import logging
import struct

import numpy as np

from app.errors import InputError, MissingArtifactError
from app.ingest.pairs import PairInterner
from app.pipeline.novelty import NoveltyIndex

logger = logging.getLogger(__name__)

MAGIC = b"RLNI"
SNAPSHOT_VERSION = 1
_ARRAYS = ("dates", "t_prefix", "doc_prefix", "pair_ptr", "pair_dates", "pair_cum")


def save_snapshot(index: NoveltyIndex, interner: PairInterner, path, meta: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "version": SNAPSHOT_VERSION,
        "n_documents": index.n_documents,
        "n_pairs": index.n_pairs,
        "words": list(interner.words),
        "meta": meta or {},
    }
    payload = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    pair_words = np.asarray(interner.pairs, dtype=np.int64).reshape(-1, 2)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", SNAPSHOT_VERSION, len(payload)))
        f.write(payload)
        for name in _ARRAYS:
            np.save(f, getattr(index, name), allow_pickle=False)
        np.save(f, pair_words, allow_pickle=False)
    logger.info(f"💾 Wrote index snapshot {path} ({index.n_pairs} pairs)")
    return path


def load_snapshot(path) -> Tuple[NoveltyIndex, PairInterner, Dict[str, Any]]:
    """Restore (index, frozen intern table, header meta)"""
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(path, "index")
    with open(path, "rb") as f:
        if f.read(len(MAGIC)) != MAGIC:
            raise InputError(f"{path} is not a novelty index snapshot")
        version, length = struct.unpack("<II", f.read(8))
        if version != SNAPSHOT_VERSION:
            raise InputError(f"{path} has snapshot version {version}, expected {SNAPSHOT_VERSION}")
        header = json.loads(f.read(length).decode("utf-8"))
        arrays = {name: np.load(f, allow_pickle=False) for name in _ARRAYS}
        pair_words = np.load(f, allow_pickle=False)

    index = NoveltyIndex(**arrays)
    interner = PairInterner.from_tables(header["words"], pair_words.tolist())
    interner.freeze()
    logger.info(f"📂 Loaded index snapshot {path}: {index.n_documents} documents, {index.n_pairs} pairs")
    return index, interner, header.get("meta", {})
