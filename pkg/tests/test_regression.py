import numpy as np
import pandas as pd
import pytest

from app.analysis.curves import CURVE_CONVENTION, check_grid, conditional_expectation_curve, s_grid, s_histogram
from app.analysis.regression import (
    POOLED_FIRM,
    RegressionSpec,
    fit_regression,
    pool_small_firms,
    prepare_sample,
    select_order_bic,
)
from app.errors import DomainError
from app.models import Outcome

QUARTIC = (6.0, -40.0, 150.0, -200.0)
FIRMS = [f"F{k}" for k in range(6)]
IPC = ["H01", "G06", "A61", "B01", "C08"]


def patent_frame(n=1500, seed=0, noise=0.1, polynomial=QUARTIC, s_values=None):
    rng = np.random.default_rng(seed)
    s = rng.uniform(0.01, 0.5, n) if s_values is None else rng.choice(s_values, n)
    firm = rng.choice(FIRMS, n)
    ipc = rng.choice(IPC, n)
    year = rng.integers(2009, 2014, n)
    kbar = rng.uniform(10.0, 200.0, n)
    team = rng.integers(2, 5, n)
    pairs = team * (team - 1)
    firm_effect = dict(zip(FIRMS, np.linspace(-0.5, 0.5, len(FIRMS))))
    ipc_effect = dict(zip(IPC, [0.3, -0.2, 0.1, 0.0, -0.4]))
    y = (
        1.0
        + sum(b * s ** (k + 1) for k, b in enumerate(polynomial))
        + 0.002 * kbar
        - 0.01 * pairs
        + np.array([firm_effect[f] for f in firm])
        + np.array([ipc_effect[c] for c in ipc])
        + 0.05 * (year - 2009)
        + rng.normal(scale=noise, size=n)
    )
    return pd.DataFrame({
        "id": [f"P{k}" for k in range(n)],
        "firm": firm,
        "ipc_class": ipc,
        "year": year,
        "H_p": team,
        "M_p": pairs,
        "s_p": s,
        "Kbar_p": kbar,
        "n_p": y,
        "c_p": np.nan,
    })


def _dummy_oracle(sample, spec):
    columns = [sample["s_p"].to_numpy() ** k for k in range(1, spec.order + 1)]
    columns += [sample[c].to_numpy(dtype=float) for c in spec.controls]
    columns.append(np.ones(len(sample)))
    for name in spec.fixed_effects:
        columns.append(pd.get_dummies(sample[name], drop_first=True, dtype=float).to_numpy())
    X = np.column_stack(columns)
    y = sample[spec.outcome.value].to_numpy()
    return np.linalg.lstsq(X, y, rcond=None)[0][: spec.order + len(spec.controls)]


def test_spec_rejects_orders_outside_range():
    with pytest.raises(DomainError):
        RegressionSpec(order=0)
    with pytest.raises(DomainError):
        RegressionSpec(order=9)
    assert RegressionSpec(order=2).regressors() == ["s^1", "s^2", "Kbar_p", "M_p"]


def test_sample_keeps_teams_with_differentiated_knowledge():
    frame = patent_frame(50)
    frame.loc[0, "s_p"] = 0.0
    frame.loc[1, "H_p"] = 1
    frame.loc[2, "n_p"] = np.nan
    sample = prepare_sample(frame, RegressionSpec(firm_threshold=1))
    assert len(sample) == 47
    assert sample["year"].dtype == object


def test_small_firms_share_one_group():
    firms = pd.Series(["A"] * 3 + ["B"] * 5 + ["C"])
    pooled = pool_small_firms(firms, threshold=4)
    assert pooled.tolist() == [POOLED_FIRM] * 3 + ["B"] * 5 + [POOLED_FIRM]


def test_absorbed_fit_matches_dummy_regression():
    frame = patent_frame(800, seed=1)
    spec = RegressionSpec(order=3, firm_threshold=1, absorb_tol=1e-13)
    fit = fit_regression(frame, spec)
    oracle = _dummy_oracle(prepare_sample(frame, spec), spec)
    np.testing.assert_allclose(fit.coefficients, oracle, rtol=1e-6, atol=1e-8)
    assert fit.names == ["s^1", "s^2", "s^3", "Kbar_p", "M_p"]
    assert fit.n_clusters == len(IPC)
    assert fit.n_params == 5


def test_fit_reports_clustered_errors_and_effects():
    frame = patent_frame(600, seed=2)
    fit = fit_regression(frame, RegressionSpec(order=2, firm_threshold=1))
    assert fit.covariance.shape == (4, 4)
    assert np.all(fit.std_errors > 0)
    assert set(fit.effects) == {"firm", "ipc_class", "year"}
    assert set(fit.effects["ipc_class"]) == set(IPC)
    payload = fit.to_dict()
    assert payload["order"] == 2
    assert set(payload["coefficients"]) == {"s^1", "s^2", "Kbar_p", "M_p"}


def test_bic_skips_orders_the_support_cannot_identify():
    frame = patent_frame(500, seed=3, s_values=[0.1, 0.25, 0.4])
    selection = select_order_bic(frame, RegressionSpec(order=4, firm_threshold=1), orders=range(1, 5))
    assert set(selection.table) == {1, 2}
    assert selection.chosen in (1, 2)


def test_bic_search_is_independent_of_thread_count():
    frame = patent_frame(600, seed=4)
    spec = RegressionSpec(order=5, firm_threshold=1)
    single = select_order_bic(frame, spec, orders=range(1, 6), threads=1)
    pooled = select_order_bic(frame, spec, orders=range(1, 6), threads=4)
    assert single.chosen == pooled.chosen
    assert single.table == pooled.table


@pytest.mark.slow
def test_bic_recovers_a_quartic():
    frame = patent_frame(10_000, seed=5)
    selection = select_order_bic(frame, RegressionSpec(firm_threshold=1), orders=range(1, 9))
    assert selection.chosen == 4
    assert selection.best.order == 4
    np.testing.assert_allclose(selection.best.polynomial, QUARTIC, rtol=0.25, atol=5.0)


def test_expectation_curve_is_centred_at_the_sample_means():
    frame = patent_frame(700, seed=6)
    fit = fit_regression(frame, RegressionSpec(order=3, firm_threshold=1))
    grid = s_grid(25)
    curve = conditional_expectation_curve(fit, grid)

    contrasts = np.column_stack([grid ** k - fit.regressor_means[k - 1] for k in range(1, 4)])
    contrasts = np.column_stack([contrasts, np.zeros((len(grid), 2))])
    np.testing.assert_allclose(curve.fit, fit.outcome_mean + contrasts @ fit.coefficients)
    variance = np.array([g @ fit.covariance @ g for g in contrasts])
    np.testing.assert_allclose(curve.half_width, 1.96 * np.sqrt(variance))
    assert np.all(curve.lower <= curve.fit) and np.all(curve.fit <= curve.upper)
    assert curve.convention == CURVE_CONVENTION


def test_grid_must_stay_inside_the_support():
    assert s_grid(4).tolist() == [0.125, 0.25, 0.375, 0.5]
    with pytest.raises(DomainError):
        check_grid([0.1, 0.6])
    with pytest.raises(DomainError):
        check_grid([0.0, 0.2])


def test_histogram_bins_are_right_closed():
    edges, counts = s_histogram([0.0, 0.01, 0.25, 0.5, 0.6], bins=2)
    assert edges.tolist() == [0.0, 0.25, 0.5]
    assert counts.tolist() == [2, 1]


def test_citation_outcome_uses_its_own_column():
    frame = patent_frame(400, seed=7)
    frame["c_p"] = np.abs(frame["n_p"])
    frame.loc[:99, "c_p"] = np.nan
    spec = RegressionSpec(outcome=Outcome.CITATIONS, order=1, firm_threshold=1)
    assert len(prepare_sample(frame, spec)) == 300
    assert fit_regression(frame, spec).n_obs == 300


@pytest.mark.slow
def test_bic_keeps_a_linear_relation_linear_across_replications():
    linear = 0
    for seed in range(50):
        frame = patent_frame(2000, seed=100 + seed, polynomial=(2.0,))
        linear += select_order_bic(frame, RegressionSpec(firm_threshold=1), orders=range(1, 9)).chosen == 1
    assert linear >= 45


@pytest.mark.slow
def test_bic_recovers_a_quartic_across_replications():
    quartic = 0
    for seed in range(50):
        frame = patent_frame(10_000, seed=200 + seed)
        quartic += select_order_bic(frame, RegressionSpec(firm_threshold=1), orders=range(1, 9), threads=4).chosen == 4
    assert quartic >= 45
