"""
Polynomial regression of a patent outcome on knowledge differentiation.

    y_p = b_1 s_p + ... + b_m s_p^m + g Kbar_p + d M_p + firm + ipc_class + year + e_p

Fixed effects are absorbed, standard errors clustered by IPC class, and the
polynomial order chosen by BIC.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple
import logging
import math

import numpy as np
import pandas as pd

from app.analysis.fixed_effects import absorb_fixed_effects, recover_effects
from app.analysis.ols import clustered_covariance, fit_ols
from app.errors import DomainError, RankDeficiencyError
from app.models import Outcome

logger = logging.getLogger(__name__)

POOLED_FIRM = "_pooled"
MAX_ORDER = 8


@dataclass(frozen=True)
class RegressionSpec:
    outcome: Outcome = Outcome.NOVELTY
    order: int = 4
    controls: Tuple[str, ...] = ("Kbar_p", "M_p")
    fixed_effects: Tuple[str, ...] = ("firm", "ipc_class", "year")
    cluster: str = "ipc_class"
    firm_threshold: int = 500
    absorb_tol: float = 1e-10
    absorb_max_iter: int = 10_000
    # total filings per firm across the corpus; None counts the regression sample
    firm_filings: Optional[Mapping[str, int]] = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        if not 1 <= self.order <= MAX_ORDER:
            raise DomainError(f"polynomial order must lie in [1, {MAX_ORDER}], got {self.order}")

    def with_order(self, order: int) -> "RegressionSpec":
        return replace(self, order=order)

    @property
    def firm_count_basis(self) -> str:
        return "regression sample" if self.firm_filings is None else "corpus filings"

    def regressors(self, order: Optional[int] = None) -> List[str]:
        return [f"s^{k}" for k in range(1, (order or self.order) + 1)] + list(self.controls)


@dataclass(frozen=True)
class RegressionFit:
    spec: RegressionSpec
    names: List[str]
    coefficients: np.ndarray
    covariance: np.ndarray
    residuals: np.ndarray
    n_obs: int
    n_params: int
    n_clusters: int
    rss: float
    bic: float
    absorb_iterations: int
    absorb_delta: float
    outcome_mean: float
    regressor_means: np.ndarray
    effects: Dict[str, Dict[str, float]] = field(default_factory=dict)

    @property
    def order(self) -> int:
        return self.spec.order

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    @property
    def polynomial(self) -> np.ndarray:
        """b_1..b_m"""
        return self.coefficients[: self.order]

    def to_dict(self) -> Dict:
        return {
            "outcome": self.spec.outcome.value,
            "order": self.order,
            "n_obs": self.n_obs,
            "n_params": self.n_params,
            "n_clusters": self.n_clusters,
            "rss": self.rss,
            "bic": self.bic,
            "coefficients": {n: float(b) for n, b in zip(self.names, self.coefficients)},
            "std_errors": {n: float(se) for n, se in zip(self.names, self.std_errors)},
            "covariance": self.covariance.tolist(),
            "absorb_iterations": self.absorb_iterations,
            "absorb_delta": self.absorb_delta,
            "fixed_effects": list(self.spec.fixed_effects),
            "cluster": self.spec.cluster,
            "firm_threshold": self.spec.firm_threshold,
            "firm_count_basis": self.spec.firm_count_basis,
        }


@dataclass(frozen=True)
class OrderSelection:
    chosen: int
    table: Dict[int, float]  # order -> BIC, orders that failed are absent
    fits: Dict[int, RegressionFit]

    @property
    def best(self) -> RegressionFit:
        return self.fits[self.chosen]


def pool_small_firms(firms: pd.Series, threshold: int, filings: Optional[Mapping[str, int]] = None) -> pd.Series:
    """Firms with fewer than `threshold` patents share one baseline group"""
    if filings is None:
        counts = firms.map(firms.value_counts())
    else:
        counts = firms.map(lambda firm: filings.get(firm, 0))
    return firms.where(counts >= threshold, POOLED_FIRM).astype(str)


def prepare_sample(frame: pd.DataFrame, spec: RegressionSpec) -> pd.DataFrame:
    """Regression sample: s_p > 0, H_p >= 2, observed outcome; firm column pooled"""
    outcome = spec.outcome.value
    mask = (frame["s_p"] > 0) & (frame["H_p"] >= 2) & frame[outcome].notna()
    sample = frame.loc[mask].reset_index(drop=True).copy()
    if "firm" in sample:
        sample["firm"] = pool_small_firms(sample["firm"].astype(str), spec.firm_threshold, spec.firm_filings)
    for name in spec.fixed_effects + (spec.cluster,):
        sample[name] = sample[name].astype(str)
    logger.info(f"📋 Regression sample: {len(sample)} of {len(frame)} patents ({outcome})")
    return sample


def build_design(sample: pd.DataFrame, spec: RegressionSpec, order: int) -> np.ndarray:
    s = sample["s_p"].to_numpy(dtype=float)
    columns = [s ** k for k in range(1, order + 1)]
    columns += [sample[c].to_numpy(dtype=float) for c in spec.controls]
    return np.column_stack(columns)


def _groups(sample: pd.DataFrame, spec: RegressionSpec) -> Tuple[List[np.ndarray], List[str]]:
    if not spec.fixed_effects:
        # a single constant group absorbs the intercept
        return [np.zeros(len(sample), dtype=np.int64)], ["intercept"]
    return [sample[name].to_numpy() for name in spec.fixed_effects], list(spec.fixed_effects)


def _fit_absorbed(
    sample: pd.DataFrame,
    spec: RegressionSpec,
    y: np.ndarray,
    X: np.ndarray,
    y_dm: np.ndarray,
    X_dm: np.ndarray,
    iterations: int,
    delta: float,
) -> RegressionFit:
    names = spec.regressors()
    ols = fit_ols(y_dm, X_dm, names)
    cov = clustered_covariance(X_dm, ols.residuals, sample[spec.cluster].to_numpy())
    n, k = X_dm.shape
    bic = n * math.log(ols.rss / n) + k * math.log(n) if ols.rss > 0 else -math.inf
    groups, group_names = _groups(sample, spec)
    effects = recover_effects(
        y - X @ ols.coefficients - ols.residuals, groups, group_names,
        spec.absorb_tol, spec.absorb_max_iter,
    )
    return RegressionFit(
        spec=spec,
        names=names,
        coefficients=ols.coefficients,
        covariance=cov,
        residuals=ols.residuals,
        n_obs=n,
        n_params=k,
        n_clusters=int(sample[spec.cluster].nunique()),
        rss=ols.rss,
        bic=bic,
        absorb_iterations=iterations,
        absorb_delta=delta,
        outcome_mean=float(y.mean()),
        regressor_means=X.mean(axis=0),
        effects=effects,
    )


def fit_regression(frame: pd.DataFrame, spec: RegressionSpec, sample: Optional[pd.DataFrame] = None) -> RegressionFit:
    """Fit one polynomial order"""
    sample = prepare_sample(frame, spec) if sample is None else sample
    y = sample[spec.outcome.value].to_numpy(dtype=float)
    X = build_design(sample, spec, spec.order)
    absorbed = absorb_fixed_effects(
        np.column_stack([y, X]),
        _groups(sample, spec)[0],
        spec.absorb_tol,
        spec.absorb_max_iter,
    )
    return _fit_absorbed(
        sample, spec, y, X, absorbed.matrix[:, 0], absorbed.matrix[:, 1:],
        absorbed.iterations, absorbed.last_delta,
    )


def select_order_bic(
    frame: pd.DataFrame,
    spec: RegressionSpec,
    orders: Sequence[int] = range(1, MAX_ORDER + 1),
    threads: int = 1,
) -> OrderSelection:
    """Fit every order, choose argmin BIC = N ln(RSS/N) + K ln N; ties go to the smaller order"""
    orders = sorted(set(orders))
    if not orders:
        raise DomainError("no polynomial orders to compare")
    sample = prepare_sample(frame, spec)
    top = max(orders)
    y = sample[spec.outcome.value].to_numpy(dtype=float)
    X_full = build_design(sample, spec, top)
    # absorb once at the highest order; lower orders are column subsets
    absorbed = absorb_fixed_effects(
        np.column_stack([y, X_full]),
        _groups(sample, spec)[0],
        spec.absorb_tol,
        spec.absorb_max_iter,
    )
    y_dm = absorbed.matrix[:, 0]
    n_controls = len(spec.controls)

    def _fit(order: int) -> Optional[RegressionFit]:
        columns = list(range(order)) + list(range(top, top + n_controls))
        try:
            return _fit_absorbed(
                sample, spec.with_order(order), y, X_full[:, columns], y_dm,
                absorbed.matrix[:, 1:][:, columns], absorbed.iterations, absorbed.last_delta,
            )
        except RankDeficiencyError as e:
            logger.warning(f"⚠️ Order {order} skipped: {e}")
            return None

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(_fit, orders))

    fits = {order: fit for order, fit in zip(orders, results) if fit is not None}
    if not fits:
        raise RankDeficiencyError(spec.regressors(orders[0])[0])
    table = {order: fit.bic for order, fit in fits.items()}
    chosen = min(table, key=lambda order: (table[order], order))
    logger.info(f"✅ BIC selects order {chosen} over {len(table)} candidate orders")
    return OrderSelection(chosen=chosen, table=table, fits=fits)
