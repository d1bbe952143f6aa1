import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from conclab.errors import ConfigurationError, DomainError
from conclab.exact_moments import exact_moment_cone
from conclab.sampling import (RngState, check_orthogonal, entry_distribution, gaussian_entries, lp_norm,
                              rademacher_entries, sample_cone, sample_cone_blocks, sample_entry_matrix,
                              sample_haar_so, sample_p_gaussian, sample_surface_rejection,
                              self_normalized_mean, surface_density, surface_expectation)


def test_rng_streams_reproducible_and_distinct():
    a = RngState(5, 1).generator().random(4)
    assert np.array_equal(a, RngState(5, 1).generator().random(4))
    assert not np.array_equal(a, RngState(5, 2).generator().random(4))
    assert not np.array_equal(a, RngState(5, 1, (0,)).generator().random(4))


def test_rng_rejects_out_of_range_seed():
    with pytest.raises(ConfigurationError):
        RngState(-1)
    with pytest.raises(ConfigurationError):
        RngState(2**64)


def test_unknown_entry_distribution():
    with pytest.raises(ConfigurationError):
        entry_distribution("cauchy")


def test_rademacher_matrix_symmetric_signs():
    X = sample_entry_matrix(rademacher_entries(), 3, RngState(0))
    assert set(np.unique(X)) <= {-1.0, 1.0}
    assert np.array_equal(X, X.T)


def test_gaussian_matrix_moments():
    X = sample_entry_matrix(gaussian_entries(), 100, RngState(1))
    off = X[np.triu_indices(100, 1)]
    assert abs(off.mean()) <= 4 / np.sqrt(100 * 99 / 2)
    X50 = sample_entry_matrix(gaussian_entries(), 50, RngState(2))
    assert abs(X50[np.triu_indices(50)].var() - 1) <= 0.2


def test_haar_planar_rotation():
    O = sample_haar_so(2, RngState(3))
    c, s = O[0, 0], O[1, 0]
    assert np.allclose(O, [[c, -s], [s, c]], atol=1e-14)
    assert abs(c * c + s * s - 1) < 1e-14


def test_haar_rejects_small_n():
    with pytest.raises(DomainError):
        sample_haar_so(1, RngState(0))


@given(st.integers(2, 30), st.integers(0, 2**32))
def test_haar_is_special_orthogonal(n, seed):
    O = sample_haar_so(n, RngState(seed))
    check_orthogonal(O)
    assert abs(np.linalg.det(O) - 1) < 1e-8


def test_haar_entry_moments(within_3se):
    sq = np.array([sample_haar_so(10, RngState(4, r))[0, 0] ** 2 for r in range(10_000)])
    within_3se(sq, 1 / 10)
    within_3se(sq**2, 3 / (10 * 12))


def test_haar_left_invariance():
    Q = np.linalg.qr(np.arange(1, 26, dtype=float).reshape(5, 5) + np.eye(5))[0]
    if np.linalg.det(Q) < 0:
        Q[:, 0] *= -1
    a = np.array([sample_haar_so(5, RngState(6, r))[0, 0] for r in range(10_000)])
    b = np.array([(Q @ sample_haar_so(5, RngState(7, r)))[0, 0] for r in range(10_000)])
    assert stats.ks_2samp(a, b).statistic < 1.628 * np.sqrt(2 / 10_000)


def test_pgauss_moments(within_3se):
    g = sample_p_gaussian(2.0, 1, RngState(8).generator(), size=100_000)[:, 0]
    assert abs(g.var() - 1) < 0.02
    z = sample_p_gaussian(4.0, 1, RngState(9).generator(), size=100_000)[:, 0]
    within_3se(np.abs(z) ** 4, 1.0)
    for p in (2.0, 3.0, 4.0):
        within_3se(sample_p_gaussian(p, 1, RngState(10).generator(), size=20_000)[:, 0], 0.0)


def test_pgauss_rejects_small_p():
    with pytest.raises(DomainError):
        sample_p_gaussian(1.5, 3, RngState(0).generator())


@given(st.floats(2, 8), st.integers(2, 40), st.integers(0, 2**32))
def test_cone_samples_on_sphere(p, n, seed):
    theta = sample_cone(p, n, RngState(seed), size=5).theta
    assert np.all(np.abs(lp_norm(theta, p) - 1) < 1e-12)


def test_cone_moments(within_3se):
    th = sample_cone_blocks(2.0, 5, 100_000, RngState(11))
    within_3se(th[:, 0] ** 2, 1 / 5)
    th3 = sample_cone_blocks(3.0, 6, 100_000, RngState(12))
    within_3se(np.abs(th3[:, 0]) ** 3, exact_moment_cone(3, 6, 3))
    within_3se(th3[:, 0] ** 3, 0.0)


def test_block_sampler_reproducible():
    a = sample_cone_blocks(3.0, 4, 20_000, RngState(13))
    assert np.array_equal(a, sample_cone_blocks(3.0, 4, 20_000, RngState(13)))


def test_self_normalized_constant_function():
    w = np.random.default_rng(0).random(100)
    est, se = self_normalized_mean(np.ones(100), w)
    assert est == pytest.approx(1.0, abs=1e-15)


def test_surface_equals_cone_at_p2():
    g = lambda th: th[:, 0] ** 2
    est, _ = surface_expectation(2.0, 6, g, 5000, RngState(14))
    plain = np.mean(g(sample_cone_blocks(2.0, 6, 5000, RngState(14))))
    assert est == pytest.approx(plain, rel=1e-12)


def test_surface_importance_vs_rejection():
    est, se = surface_expectation(4.0, 10, lambda th: th[:, 0] ** 2, 100_000, RngState(15))
    rej = sample_surface_rejection(4.0, 10, 100_000, RngState(16).generator())[:, 0] ** 2
    se_rej = rej.std(ddof=1) / np.sqrt(rej.size)
    assert abs(est - rej.mean()) <= 3 * np.hypot(se, se_rej)


@given(st.floats(2, 8), st.integers(2, 20), st.integers(0, 2**32))
def test_surface_density_at_most_one(p, n, seed):
    theta = sample_cone(p, n, RngState(seed), size=20).theta
    h = surface_density(theta, p)
    assert np.all((h > 0) & (h <= 1 + 1e-12))
