import numpy as np
import pytest
from scipy.optimize import linprog

from app.analysis.quantile import (
    fit_quantile,
    is_degenerate,
    pinball_loss,
    quantile_curves,
    quantile_design,
)
from app.analysis.regression import RegressionSpec
from app.errors import DomainError

from test_regression import patent_frame


def _lp_quantile_loss(y, X, tau):
    """Check-loss minimum from the linear program min tau 1'u + (1-tau) 1'v, Xb + u - v = y"""
    n, k = X.shape
    c = np.concatenate([np.zeros(k), np.full(n, tau), np.full(n, 1.0 - tau)])
    A_eq = np.hstack([X, np.eye(n), -np.eye(n)])
    bounds = [(None, None)] * k + [(0, None)] * (2 * n)
    result = linprog(c, A_eq=A_eq, b_eq=y, bounds=bounds, method="highs")
    assert result.success
    return result.fun


def test_pinball_loss():
    assert pinball_loss(np.array([2.0, -1.0]), 0.25) == pytest.approx(0.25 * 2.0 + 0.75 * 1.0)


def test_intercept_only_fit_is_the_sample_quantile():
    rng = np.random.default_rng(0)
    y = rng.exponential(size=101)
    fit = fit_quantile(y, np.ones((101, 1)), 0.3)
    assert fit.coefficients[0] == pytest.approx(np.sort(y)[30], abs=1e-9)


@pytest.mark.parametrize("tau", [0.1, 0.5, 0.9])
def test_fit_reaches_the_linear_program_optimum(tau):
    rng = np.random.default_rng(1)
    n = 150
    s = rng.uniform(0.01, 0.5, n)
    X = np.column_stack([np.ones(n), s, s ** 2])
    y = 1.0 + 4.0 * s - 3.0 * s ** 2 + rng.standard_t(3, size=n) * 0.2
    fit = fit_quantile(y, X, tau)
    optimum = _lp_quantile_loss(y, X, tau)
    assert fit.loss == pytest.approx(optimum, rel=1e-6)
    assert fit.loss == pytest.approx(pinball_loss(y - X @ fit.coefficients, tau))


def test_invalid_levels_and_sizes():
    X = np.ones((5, 1))
    with pytest.raises(DomainError):
        fit_quantile(np.arange(5.0), X, 1.0)
    with pytest.raises(DomainError):
        fit_quantile(np.arange(2.0), np.ones((2, 2)), 0.5)


def test_degenerate_levels():
    y = np.array([0.0] * 6 + [1.0, 2.0, 3.0, 4.0])
    assert is_degenerate(y, 0.5)
    assert is_degenerate(y, 0.6)
    assert not is_degenerate(y, 0.75)


def test_design_has_intercept_polynomial_controls_and_indicators():
    frame = patent_frame(300, seed=2)
    design = quantile_design(frame, RegressionSpec(order=2, firm_threshold=1))
    assert design.names[:5] == ["intercept", "s^1", "s^2", "Kbar_p", "M_p"]
    indicators = design.names[5:]
    assert any(name.startswith("firm=") for name in indicators)
    assert any(name.startswith("ipc_class=") for name in indicators)
    assert any(name.startswith("year=") for name in indicators)
    assert np.linalg.matrix_rank(design.X) == design.X.shape[1]


def test_curves_are_ordered_across_levels():
    frame = patent_frame(400, seed=3, noise=0.3)
    curves = quantile_curves(frame, RegressionSpec(order=2, firm_threshold=1), [0.9, 0.1, 0.5])
    assert curves.taus == [0.1, 0.5, 0.9]
    assert curves.degenerate == []
    low, mid, high = (curves.values[t] for t in curves.taus)
    assert np.all(low < mid) and np.all(mid < high)
    rows = curves.rows()
    assert len(rows) == 3 * len(curves.grid)
    assert rows[0][0] == 0.1


def test_degenerate_levels_are_skipped():
    frame = patent_frame(200, seed=4)
    frame["n_p"] = frame["n_p"].abs() + 1.0
    frame.loc[:159, "n_p"] = 0.0
    curves = quantile_curves(frame, RegressionSpec(order=1, firm_threshold=1), [0.5, 0.9])
    assert curves.degenerate == [0.5]
    assert list(curves.values) == [0.9]


def test_curves_do_not_depend_on_thread_count():
    frame = patent_frame(300, seed=5)
    spec = RegressionSpec(order=2, firm_threshold=1)
    single = quantile_curves(frame, spec, [0.25, 0.75], threads=1)
    pooled = quantile_curves(frame, spec, [0.25, 0.75], threads=3)
    for tau in single.taus:
        np.testing.assert_allclose(single.values[tau], pooled.values[tau], rtol=1e-12)


def test_median_slope_agrees_with_least_squares_under_symmetric_noise():
    rng = np.random.default_rng(6)
    n = 2000
    x = rng.uniform(0.0, 0.5, n)
    X = np.column_stack([np.ones(n), x])
    y = 0.5 + 2.0 * x + rng.normal(scale=0.2, size=n)
    median = fit_quantile(y, X, 0.5)
    ols, *_ = np.linalg.lstsq(X, y, rcond=None)
    residuals = y - X @ ols
    se = np.sqrt(residuals @ residuals / (n - 2) * np.linalg.inv(X.T @ X)[1, 1])
    assert abs(median.coefficients[1] - ols[1]) < 3 * se


def test_fit_is_a_local_minimum_of_the_check_loss():
    rng = np.random.default_rng(7)
    n = 300
    x = rng.uniform(0.0, 0.5, n)
    X = np.column_stack([np.ones(n), x, x ** 2])
    y = 1.0 + x - x ** 2 + rng.laplace(scale=0.1, size=n)
    for tau in (0.25, 0.75):
        fit = fit_quantile(y, X, tau)
        for j in range(X.shape[1]):
            for step in (-1e-3, 1e-3):
                moved = fit.coefficients.copy()
                moved[j] += step
                assert pinball_loss(y - X @ moved, tau) >= fit.loss - 1e-12
