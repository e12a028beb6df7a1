import numpy as np
import pytest

from app.analysis.ols import clustered_covariance, fit_ols
from app.errors import ClusterError, DomainError, RankDeficiencyError


def test_fit_matches_lstsq():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(200, 4))
    y = X @ np.array([1.0, -2.0, 0.5, 3.0]) + rng.normal(size=200)
    fit = fit_ols(y, X)
    oracle = np.linalg.lstsq(X, y, rcond=None)[0]
    np.testing.assert_allclose(fit.coefficients, oracle, rtol=1e-10)
    assert fit.rss == pytest.approx(float(fit.residuals @ fit.residuals))


def test_collinear_column_is_named():
    rng = np.random.default_rng(1)
    x = rng.normal(size=50)
    X = np.column_stack([x, rng.normal(size=50), 2.0 * x])
    with pytest.raises(RankDeficiencyError) as e:
        fit_ols(rng.normal(size=50), X, ["a", "b", "c"])
    assert e.value.column in {"a", "c"}


def test_too_few_observations():
    with pytest.raises(DomainError):
        fit_ols(np.ones(3), np.eye(3))


def _manual_sandwich(X, residuals, clusters, n_params):
    n = len(residuals)
    bread = np.linalg.inv(X.T @ X)
    meat = np.zeros((X.shape[1], X.shape[1]))
    labels = sorted(set(clusters))
    for g in labels:
        mask = np.asarray(clusters) == g
        score = X[mask].T @ residuals[mask]
        meat += np.outer(score, score)
    g = len(labels)
    return (g / (g - 1)) * ((n - 1) / (n - n_params)) * bread @ meat @ bread


def test_clustered_covariance_matches_the_sandwich_formula():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(300, 3))
    clusters = rng.choice(["H01", "G06", "A61", "B01", "C08"], size=300)
    y = X @ np.array([0.5, 1.0, -1.0]) + rng.normal(size=300)
    fit = fit_ols(y, X)
    cov = clustered_covariance(X, fit.residuals, clusters)
    np.testing.assert_allclose(cov, _manual_sandwich(X, fit.residuals, clusters, 3), rtol=1e-10)
    np.testing.assert_allclose(cov, cov.T)


def test_small_sample_correction_ignores_absorbed_effects():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(120, 2))
    residuals = rng.normal(size=120)
    clusters = rng.integers(0, 6, size=120)
    default = clustered_covariance(X, residuals, clusters)
    explicit = clustered_covariance(X, residuals, clusters, n_params=10)
    np.testing.assert_allclose(explicit, default * (120 - 2) / (120 - 10))


def test_single_cluster_is_rejected():
    X = np.ones((10, 1))
    with pytest.raises(ClusterError):
        clustered_covariance(X, np.zeros(10), ["a"] * 10)


def test_sandwich_on_a_hand_checked_instance():
    # two clusters of three; X = [1, x]
    X = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 0.0], [1.0, 1.0], [1.0, 2.0]])
    residuals = np.array([1.0, -1.0, 0.0, 0.5, 0.5, -1.0])
    clusters = ["a", "a", "a", "b", "b", "b"]
    # scores: s_a = (0, -1), s_b = (0, -1.5); X'X = [[6, 6], [6, 10]]
    bread = np.linalg.inv(np.array([[6.0, 6.0], [6.0, 10.0]]))
    meat = np.array([[0.0, 0.0], [0.0, 1.0 + 2.25]])
    expected = (2 / 1) * (5 / 4) * bread @ meat @ bread
    np.testing.assert_allclose(clustered_covariance(X, residuals, clusters), expected, rtol=1e-10, atol=1e-14)
