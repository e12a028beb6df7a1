"""
Greedy pair matching within one category.

Repeatedly matching the remaining pair with the largest net value yields the
unique stable matching when all values are distinct.
"""

from typing import List, Optional, Tuple

import numpy as np

from app.errors import MatchingError

Pair = Tuple[int, int]


def greedy_stable_matching(values: np.ndarray, secondary: Optional[np.ndarray] = None) -> List[Pair]:
    """Match agents 0..n-1 on a symmetric pair value matrix.

    Ties in `values` fall back to `secondary` (largest first), then to the
    lexicographically smallest pair (i, j), i < j.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if values.shape != (n, n):
        raise MatchingError(f"pair values must be a square matrix, got shape {values.shape}")
    if n % 2:
        raise MatchingError(f"cannot pair an odd number of agents ({n})")

    rows, cols = np.triu_indices(n, k=1)
    primary = values[rows, cols]
    if np.isnan(primary).any():
        raise MatchingError("pair values missing for some agent pairs")
    tiebreak = np.zeros_like(primary) if secondary is None else np.asarray(secondary, dtype=float)[rows, cols]
    # lexsort: last key is primary; triu order already makes (i, j) ascending
    order = np.lexsort((np.arange(len(primary)), -tiebreak, -primary))

    matched = np.zeros(n, dtype=bool)
    matching: List[Pair] = []
    for k in order:
        i, j = int(rows[k]), int(cols[k])
        if not matched[i] and not matched[j]:
            matched[i] = matched[j] = True
            matching.append((i, j))
            if len(matching) == n // 2:
                break
    return matching


def partners(matching: List[Pair], n: int) -> np.ndarray:
    partner = np.full(n, -1, dtype=np.int64)
    for i, j in matching:
        partner[i] = j
        partner[j] = i
    if (partner < 0).any():
        raise MatchingError("matching leaves agents unpaired")
    return partner


def find_blocking_pairs(values: np.ndarray, matching: List[Pair]) -> List[Pair]:
    """Pairs (i, j) that both strictly prefer each other to their assigned partners"""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    partner = partners(matching, n)
    own = values[np.arange(n), partner]
    blocking = (values > own[:, None]) & (values > own[None, :])
    blocking[np.arange(n), partner] = False
    rows, cols = np.nonzero(np.triu(blocking, k=1))
    return [(int(i), int(j)) for i, j in zip(rows, cols)]
