"""
Multi-way fixed effect absorption by alternating projections.

Each sweep demeans every column within the groups of each dimension in turn;
the fixed point is the residual of a projection on all group indicators.
"""

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple
import logging

import numpy as np

from app.errors import ConvergenceError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AbsorptionResult:
    matrix: np.ndarray
    iterations: int
    last_delta: float


def encode_groups(labels) -> Tuple[np.ndarray, np.ndarray]:
    """Integer codes and sorted distinct labels of a label vector"""
    levels, codes = np.unique(np.asarray(labels), return_inverse=True)
    return codes.astype(np.int64), levels


def _demean(matrix: np.ndarray, codes: np.ndarray, counts: np.ndarray) -> np.ndarray:
    out = np.empty_like(matrix)
    for col in range(matrix.shape[1]):
        means = np.bincount(codes, weights=matrix[:, col], minlength=len(counts)) / counts
        out[:, col] = matrix[:, col] - means[codes]
    return out


def absorb_fixed_effects(
    design: np.ndarray,
    groups: Sequence,
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> AbsorptionResult:
    """Demean the columns of `design` (outcome and regressors) within every group dimension.

    Stops when the largest change of a sweep, relative to the column scale, falls below tol.
    """
    matrix = np.array(design, dtype=float, copy=True)
    squeeze = matrix.ndim == 1
    if squeeze:
        matrix = matrix[:, None]
    n = matrix.shape[0]

    encoded: List[Tuple[np.ndarray, np.ndarray]] = []
    for labels in groups:
        codes, _ = encode_groups(labels)
        if len(codes) != n:
            raise ValueError(f"group vector has length {len(codes)}, expected {n}")
        encoded.append((codes, np.bincount(codes).astype(float)))

    if not encoded or n == 0:
        return AbsorptionResult(matrix[:, 0] if squeeze else matrix, 0, 0.0)

    scale = np.maximum(1.0, np.abs(matrix).max(axis=0))
    delta = np.inf
    for iteration in range(1, max_iter + 1):
        previous = matrix
        for codes, counts in encoded:
            matrix = _demean(matrix, codes, counts)
        if len(encoded) == 1:
            delta = 0.0
        else:
            delta = float((np.abs(matrix - previous) / scale).max())
        if delta < tol:
            logger.debug(f"Absorbed {len(encoded)} fixed effect dimensions in {iteration} sweeps")
            return AbsorptionResult(matrix[:, 0] if squeeze else matrix, iteration, delta)

    raise ConvergenceError("fixed effect absorption", max_iter, delta)


def recover_effects(
    component: np.ndarray,
    groups: Sequence,
    names: Sequence[str],
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> Dict[str, Dict[str, float]]:
    """Split the absorbed component y - X b - e into per-dimension group effects by backfitting.

    Effects of every dimension after the first are centred, so the first carries the level.
    """
    component = np.asarray(component, dtype=float)
    encoded = []
    for labels in groups:
        codes, levels = encode_groups(labels)
        encoded.append((codes, levels, np.bincount(codes).astype(float)))
    effects = [np.zeros(len(levels)) for _, levels, _ in encoded]
    scale = max(1.0, float(np.abs(component).max(initial=0.0)))

    for _ in range(max_iter):
        change = 0.0
        for k, (codes, levels, counts) in enumerate(encoded):
            others = sum(effects[j][encoded[j][0]] for j in range(len(encoded)) if j != k)
            updated = np.bincount(codes, weights=component - others, minlength=len(levels)) / counts
            change = max(change, float(np.abs(updated - effects[k]).max(initial=0.0)))
            effects[k] = updated
        if change / scale < tol:
            break
    else:
        logger.warning(f"⚠️ Effect recovery stopped after {max_iter} sweeps")

    for k in range(1, len(effects)):
        shift = float(np.mean(effects[k][encoded[k][0]]))
        effects[k] = effects[k] - shift
        effects[0] = effects[0] + shift

    return {
        name: {str(level): float(value) for level, value in zip(levels, effect)}
        for name, (_, levels, _), effect in zip(names, encoded, effects)
    }
