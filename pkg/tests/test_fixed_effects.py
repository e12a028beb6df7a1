import numpy as np
import pytest

from app.analysis.fixed_effects import absorb_fixed_effects, encode_groups, recover_effects
from app.analysis.ols import fit_ols
from app.errors import ConvergenceError


def _two_way_panel(seed=0, n=400):
    rng = np.random.default_rng(seed)
    firm = rng.integers(0, 12, size=n)
    year = rng.integers(0, 7, size=n)
    # unbalanced: firm effects correlated with the regressor
    x = rng.normal(size=(n, 2)) + 0.3 * firm[:, None]
    y = x @ np.array([1.5, -0.7]) + 0.4 * firm - 0.2 * year + rng.normal(scale=0.1, size=n)
    return y, x, firm, year


def _dummies(codes):
    levels = np.unique(codes)
    return (codes[:, None] == levels[None, 1:]).astype(float)


def test_absorbed_ols_matches_the_dummy_variable_regression():
    y, x, firm, year = _two_way_panel()
    absorbed = absorb_fixed_effects(np.column_stack([y, x]), [firm, year], tol=1e-13)
    within = fit_ols(absorbed.matrix[:, 0], absorbed.matrix[:, 1:])

    full = np.column_stack([x, np.ones(len(y)), _dummies(firm), _dummies(year)])
    oracle = np.linalg.lstsq(full, y, rcond=None)[0][:2]
    np.testing.assert_allclose(within.coefficients, oracle, rtol=1e-7, atol=1e-9)

    residuals = y - full @ np.linalg.lstsq(full, y, rcond=None)[0]
    np.testing.assert_allclose(within.residuals, residuals, atol=1e-7)


def test_single_dimension_is_exact_in_one_sweep():
    y, x, firm, _ = _two_way_panel(1)
    absorbed = absorb_fixed_effects(x, [firm])
    assert absorbed.iterations == 1
    for code in np.unique(firm):
        np.testing.assert_allclose(absorbed.matrix[firm == code].mean(axis=0), 0.0, atol=1e-12)


def test_vector_input_keeps_its_shape():
    y, _, firm, year = _two_way_panel(2)
    absorbed = absorb_fixed_effects(y, [firm, year])
    assert absorbed.matrix.shape == y.shape


def test_no_dimensions_returns_the_input():
    y, _, _, _ = _two_way_panel(3)
    absorbed = absorb_fixed_effects(y, [])
    np.testing.assert_array_equal(absorbed.matrix, y)
    assert absorbed.iterations == 0


def test_iteration_cap_raises_convergence_error():
    _, x, firm, year = _two_way_panel(4)
    with pytest.raises(ConvergenceError) as e:
        absorb_fixed_effects(x, [firm, year], tol=1e-300, max_iter=3)
    assert e.value.iterations == 3


def test_recovered_effects_reproduce_the_component():
    rng = np.random.default_rng(6)
    firm = rng.integers(0, 5, size=300)
    year = rng.integers(0, 4, size=300)
    firm_effect = np.array([0.0, 1.0, -2.0, 0.5, 3.0])
    year_effect = np.array([0.3, -0.1, 0.2, -0.4])
    component = firm_effect[firm] + year_effect[year]

    effects = recover_effects(component, [firm, year], ["firm", "year"])
    rebuilt = np.array([effects["firm"][str(f)] + effects["year"][str(t)] for f, t in zip(firm, year)])
    np.testing.assert_allclose(rebuilt, component, atol=1e-8)
    # later dimensions are centred over the sample
    assert np.mean([effects["year"][str(t)] for t in year]) == pytest.approx(0.0, abs=1e-10)


def test_group_encoding_is_sorted():
    codes, levels = encode_groups(["b", "a", "c", "a"])
    assert levels.tolist() == ["a", "b", "c"]
    assert codes.tolist() == [1, 0, 2, 0]
