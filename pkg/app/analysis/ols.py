"""
Least squares by pivoted QR and cluster-robust sandwich covariance.
"""

from dataclasses import dataclass
from typing import Optional, Sequence
import logging

import numpy as np
from scipy import linalg

from app.errors import ClusterError, DomainError, RankDeficiencyError
from app.analysis.fixed_effects import encode_groups

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OLSResult:
    coefficients: np.ndarray
    residuals: np.ndarray
    rss: float


def _column_names(names: Optional[Sequence[str]], k: int) -> Sequence[str]:
    return list(names) if names is not None else [f"x{j}" for j in range(k)]


def fit_ols(y: np.ndarray, X: np.ndarray, names: Optional[Sequence[str]] = None) -> OLSResult:
    """Least squares via QR with column pivoting; a dependent column raises RankDeficiencyError"""
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    names = _column_names(names, k)
    if n <= k:
        raise DomainError(f"need more observations than regressors (N={n}, K={k})")

    q, r, pivot = linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    threshold = max(n, k) * np.finfo(float).eps * (diag[0] if k else 0.0)
    rank = int(np.sum(diag > threshold))
    if rank < k:
        raise RankDeficiencyError(names[pivot[rank]])

    beta = np.empty(k)
    beta[pivot] = linalg.solve_triangular(r, q.T @ y)
    residuals = y - X @ beta
    return OLSResult(coefficients=beta, residuals=residuals, rss=float(residuals @ residuals))


def clustered_covariance(
    X: np.ndarray,
    residuals: np.ndarray,
    cluster_labels,
    n_params: Optional[int] = None,
) -> np.ndarray:
    """Sandwich (X'X)^-1 (sum_g s_g s_g') (X'X)^-1 times (G/(G-1))((N-1)/(N-K)).

    K counts estimated coefficients only; absorbed fixed effects are excluded.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    residuals = np.asarray(residuals, dtype=float)
    n, k = X.shape
    k = n_params if n_params is not None else k
    codes, levels = encode_groups(cluster_labels)
    g = len(levels)
    if g < 2:
        raise ClusterError(f"clustered covariance needs at least 2 clusters, got {g}")

    scores = np.zeros((g, X.shape[1]))
    np.add.at(scores, codes, X * residuals[:, None])
    meat = scores.T @ scores
    bread = linalg.inv(X.T @ X)
    correction = (g / (g - 1)) * ((n - 1) / (n - k))
    cov = correction * bread @ meat @ bread
    return (cov + cov.T) / 2
