"""
Linear quantile regression.

Minimizes the check loss sum rho_tau(y - Xb) by iteratively reweighted least
squares on an epsilon-smoothed absolute value, annealing epsilon toward zero,
then polishes the result onto an interpolating basis (an exact vertex of the
linear program) whenever that does not raise the loss. Fixed effects enter as
explicit indicator columns.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd
from scipy import linalg

from app.analysis.curves import check_grid, s_grid
from app.analysis.regression import RegressionSpec, build_design, prepare_sample
from app.errors import ConvergenceError, DomainError, RankDeficiencyError

logger = logging.getLogger(__name__)


def pinball_loss(residuals: np.ndarray, tau: float) -> float:
    residuals = np.asarray(residuals, dtype=float)
    return float(np.sum(np.where(residuals >= 0, tau * residuals, (tau - 1.0) * residuals)))


@dataclass(frozen=True)
class QuantileFit:
    tau: float
    coefficients: np.ndarray
    names: List[str]
    loss: float
    iterations: int
    polished: bool


def _weighted_lstsq(X: np.ndarray, y: np.ndarray, weights: np.ndarray) -> np.ndarray:
    root = np.sqrt(weights)
    return np.linalg.lstsq(X * root[:, None], y * root, rcond=None)[0]


def _vertex(X: np.ndarray, y: np.ndarray, residuals: np.ndarray) -> Optional[np.ndarray]:
    """Solve X_B b = y_B on the K smallest-|residual| rows that are linearly independent"""
    k = X.shape[1]
    basis: List[int] = []
    rows = np.empty((0, k))
    for i in np.argsort(np.abs(residuals), kind="stable"):
        candidate = np.vstack([rows, X[i]])
        if np.linalg.matrix_rank(candidate) > len(basis):
            basis.append(int(i))
            rows = candidate
            if len(basis) == k:
                break
    if len(basis) < k:
        return None
    try:
        return linalg.solve(rows, y[basis])
    except linalg.LinAlgError:
        return None


def fit_quantile(
    y: np.ndarray,
    X: np.ndarray,
    tau: float,
    tol: float = 1e-8,
    max_iter: int = 500,
    names: Optional[Sequence[str]] = None,
) -> QuantileFit:
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    names = list(names) if names is not None else [f"x{j}" for j in range(k)]
    if not 0.0 < tau < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {tau}")
    if n <= k:
        raise DomainError(f"need more observations than regressors (N={n}, K={k})")

    beta = np.linalg.lstsq(X, y, rcond=None)[0]
    residuals = y - X @ beta
    scale = max(1.0, float(np.abs(y).max()))
    eps_floor = 1e-10 * scale
    eps = max(float(np.median(np.abs(residuals))), eps_floor)
    asymmetry = lambda r: np.where(r >= 0, tau, 1.0 - tau)

    converged = False
    delta = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        weights = asymmetry(residuals) / np.maximum(np.abs(residuals), eps)
        updated = _weighted_lstsq(X, y, weights)
        delta = float(np.abs(updated - beta).max())
        beta = updated
        residuals = y - X @ beta
        if delta < tol * (1.0 + float(np.abs(beta).max())):
            if eps <= eps_floor:
                converged = True
                break
            eps = max(eps * 0.1, eps_floor)
        else:
            eps = max(eps * 0.5, eps_floor)

    loss = pinball_loss(residuals, tau)
    polished = False
    vertex = _vertex(X, y, residuals)
    if vertex is not None:
        vertex_loss = pinball_loss(y - X @ vertex, tau)
        if vertex_loss <= loss * (1.0 + 1e-12) + 1e-12:
            beta, loss, polished = vertex, vertex_loss, True

    if not converged and not polished:
        raise ConvergenceError(f"quantile regression at tau={tau}", max_iter, delta)
    logger.debug(f"Quantile {tau}: {iterations} IRLS iterations, loss {loss:.6g}, polished={polished}")
    return QuantileFit(tau=tau, coefficients=beta, names=names, loss=loss, iterations=iterations, polished=polished)


def is_degenerate(y: np.ndarray, tau: float) -> bool:
    """Outcome mass at its minimum reaches tau, so the conditional quantile sits on the floor"""
    y = np.asarray(y, dtype=float)
    return bool(np.mean(y <= y.min()) >= tau)


@dataclass(frozen=True)
class QuantileDesign:
    X: np.ndarray
    y: np.ndarray
    names: List[str]
    order: int

    @property
    def evaluation_point(self) -> np.ndarray:
        """Column means: controls and indicators are evaluated at their sample means"""
        return self.X.mean(axis=0)


def quantile_design(frame: pd.DataFrame, spec: RegressionSpec) -> QuantileDesign:
    """Intercept, s^1..s^m, controls, then drop-first indicators per fixed effect dimension.

    Indicator columns collinear with earlier columns are dropped.
    """
    sample = prepare_sample(frame, spec)
    y = sample[spec.outcome.value].to_numpy(dtype=float)
    base = np.column_stack([np.ones(len(sample)), build_design(sample, spec, spec.order)])
    names = ["intercept"] + spec.regressors()

    for j in range(base.shape[1]):
        if np.linalg.matrix_rank(base[:, : j + 1]) <= j:
            raise RankDeficiencyError(names[j])

    dummies = []
    dummy_names = []
    for dim in spec.fixed_effects:
        encoded = pd.get_dummies(sample[dim], prefix=dim, prefix_sep="=", drop_first=True, dtype=float)
        for column in encoded.columns:
            dummies.append(encoded[column].to_numpy())
            dummy_names.append(column)

    X = base
    for column, name in zip(dummies, dummy_names):
        candidate = np.column_stack([X, column])
        if np.linalg.matrix_rank(candidate) == candidate.shape[1]:
            X = candidate
            names.append(name)
        else:
            logger.debug(f"Dropped collinear indicator {name}")
    return QuantileDesign(X=X, y=y, names=names, order=spec.order)


@dataclass(frozen=True)
class QuantileCurves:
    taus: List[float]
    grid: np.ndarray
    values: Dict[float, np.ndarray]
    fits: Dict[float, QuantileFit]
    degenerate: List[float] = field(default_factory=list)

    def rows(self) -> List[Tuple[float, float, float]]:
        return [(tau, float(s), float(v)) for tau in self.taus if tau in self.values
                for s, v in zip(self.grid, self.values[tau])]


def quantile_curve(fit: QuantileFit, design: QuantileDesign, grid: np.ndarray) -> np.ndarray:
    base = design.evaluation_point @ fit.coefficients
    poly = fit.coefficients[1: design.order + 1]
    mean_terms = design.evaluation_point[1: design.order + 1] @ poly
    powers = grid[:, None] ** np.arange(1, design.order + 1)[None, :]
    return base - mean_terms + powers @ poly


def quantile_curves(
    frame: pd.DataFrame,
    spec: RegressionSpec,
    taus: Sequence[float],
    grid: Optional[np.ndarray] = None,
    tol: float = 1e-8,
    max_iter: int = 500,
    threads: int = 1,
) -> QuantileCurves:
    """Quantile curves in s for each tau; degenerate levels are reported and skipped"""
    grid = check_grid(s_grid() if grid is None else grid)
    design = quantile_design(frame, spec)
    taus = sorted(taus)
    degenerate = [tau for tau in taus if is_degenerate(design.y, tau)]
    for tau in degenerate:
        logger.warning(f"⚠️ Quantile {tau} is degenerate: outcome mass at its minimum reaches {tau}")
    active = [tau for tau in taus if tau not in degenerate]

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        fits = list(pool.map(lambda tau: fit_quantile(design.y, design.X, tau, tol, max_iter, design.names), active))

    values = {fit.tau: quantile_curve(fit, design, grid) for fit in fits}
    logger.info(f"✅ Fitted {len(fits)} quantile curves ({len(degenerate)} degenerate)")
    return QuantileCurves(taus=taus, grid=grid, values=values, fits={f.tau: f for f in fits}, degenerate=degenerate)
