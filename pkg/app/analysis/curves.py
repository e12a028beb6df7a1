from dataclasses import dataclass
from typing import Optional
import logging

import numpy as np

from app.analysis.regression import RegressionFit
from app.errors import DomainError

logger = logging.getLogger(__name__)

Z_95 = 1.96
CURVE_CONVENTION = "controls and fixed effects at sample means"


@dataclass(frozen=True)
class CurveEstimate:
    grid: np.ndarray
    fit: np.ndarray
    half_width: np.ndarray
    convention: str = CURVE_CONVENTION

    @property
    def lower(self) -> np.ndarray:
        return self.fit - self.half_width

    @property
    def upper(self) -> np.ndarray:
        return self.fit + self.half_width


def s_grid(points: int = 50) -> np.ndarray:
    """Evenly spaced grid over (0, 0.5], ending at 0.5"""
    return np.linspace(0.5 / points, 0.5, points)


def check_grid(grid) -> np.ndarray:
    grid = np.sort(np.asarray(grid, dtype=float))
    if grid.size == 0 or not np.all(np.isfinite(grid)) or grid[0] <= 0.0 or grid[-1] > 0.5:
        raise DomainError("curve grid must lie in (0, 0.5]")
    return grid


def conditional_expectation_curve(fit: RegressionFit, grid: Optional[np.ndarray] = None) -> CurveEstimate:
    """E[y | s] with other regressors and absorbed effects at their sample means.

    The contrast for grid point s is g_k = s^k - mean(s_p^k) on the polynomial
    terms and 0 elsewhere; fit = mean(y) + g'b, half width = 1.96 sqrt(g'Vg).
    """
    grid = check_grid(s_grid() if grid is None else grid)
    m = fit.order
    powers = grid[:, None] ** np.arange(1, m + 1)[None, :]
    contrasts = np.zeros((len(grid), len(fit.coefficients)))
    contrasts[:, :m] = powers - fit.regressor_means[None, :m]

    values = fit.outcome_mean + contrasts @ fit.coefficients
    variance = np.einsum("ij,jk,ik->i", contrasts, fit.covariance, contrasts)
    half_width = Z_95 * np.sqrt(np.clip(variance, 0.0, None))
    return CurveEstimate(grid=grid, fit=values, half_width=half_width)


def s_histogram(values, bins: int = 50):
    """Counts over right-closed bins covering (0, 0.5]; values outside are ignored"""
    edges = np.linspace(0.0, 0.5, bins + 1)
    values = np.asarray(values, dtype=float)
    values = values[(values > 0.0) & (values <= 0.5)]
    index = np.searchsorted(edges, values, side="left") - 1
    return edges, np.bincount(index, minlength=bins)[:bins]
