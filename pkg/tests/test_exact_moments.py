import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from conclab.errors import DomainError
from conclab.exact_moments import (cone_moment, cone_moment_bound, density_l2_bound, exact_moment_cone,
                                   exact_neg_moment_pgauss, exact_signed_moment_cone, expmoment_series,
                                   moment_to_expmoment, moment_to_tail, neg_moment_bound, second_moment_cone)
from conclab.sampling import RngState, sample_p_gaussian, lp_norm

# oracle values below were computed independently with mpmath (30 digits)


def test_cone_moment_values():
    assert exact_moment_cone(2, 5, 2) == pytest.approx(0.2, rel=1e-14)
    assert exact_moment_cone(2, 4, 4) == pytest.approx(1 / 8, rel=1e-14)
    assert exact_moment_cone(3, 6, 3) == pytest.approx(1 / 6, rel=1e-14)
    assert second_moment_cone(4, 20) == pytest.approx(0.154973412267035060, rel=1e-13)
    for p, n in ((2, 3), (3.5, 7), (4, 100)):
        assert exact_moment_cone(p, n, 0) == pytest.approx(1.0, rel=1e-14)


def test_signed_moments():
    assert exact_signed_moment_cone(3, 6, 3) == 0.0
    assert exact_signed_moment_cone(2, 5, 2) == pytest.approx(0.2)


def test_large_n_no_overflow():
    v = exact_moment_cone(2.5, 100_000, 3)
    assert np.isfinite(v) and v > 0


@given(st.sampled_from([2.0, 2.5, 3.0, 4.0, 6.0]), st.integers(2, 500), st.floats(0.1, 20))
def test_bound_dominates_exact(p, n, v):
    m = cone_moment(p, n, v)
    assert m.value <= m.bound * (1 + 1e-12)


@given(st.floats(2, 6), st.integers(3, 200), st.floats(0, 10), st.floats(0, 10))
def test_moments_decrease_in_order(p, n, a, b):
    lo, hi = sorted((a, b))
    # |theta_1| <= 1 on the sphere, so moments decrease in v
    assert exact_moment_cone(p, n, hi) <= exact_moment_cone(p, n, lo) * (1 + 1e-12)


def test_neg_moment_values():
    assert exact_neg_moment_pgauss(2, 10, 2) == pytest.approx(1 / 8, rel=1e-14)
    assert exact_neg_moment_pgauss(2, 3, 1) == pytest.approx(0.797884560802865356, rel=1e-14)
    assert exact_neg_moment_pgauss(4, 8, 0) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(DomainError):
        exact_neg_moment_pgauss(2, 2, 2)


@pytest.mark.parametrize("p", [2.0, 4.0])
@pytest.mark.parametrize("n", [10, 20])
@pytest.mark.parametrize("v", [1.0, 2.0])
def test_neg_moment_monte_carlo(p, n, v):
    Z = sample_p_gaussian(p, n, RngState(int(10 * p + n + v)).generator(), size=50_000)
    x = lp_norm(Z, p) ** -v
    assert abs(x.mean() - exact_neg_moment_pgauss(p, n, v)) <= 3 * x.std(ddof=1) / np.sqrt(x.size)


@given(st.sampled_from([2.0, 3.0, 4.0]), st.integers(5, 300), st.floats(0.1, 2))
def test_neg_moment_bound(p, n, v):
    assume(v <= p and n > v)
    assert exact_neg_moment_pgauss(p, n, v) <= neg_moment_bound(p, n, v) * (1 + 1e-12)


def test_density_bound_values():
    assert density_l2_bound(2) == 1.0
    assert density_l2_bound(4) == pytest.approx(1.495348781221220542, rel=1e-14)
    assert density_l2_bound(3) == pytest.approx(1.259921049894873165, rel=1e-14)


def test_expmoment_constant():
    assert moment_to_expmoment(1) == pytest.approx(1 / (2 * math.e))
    assert moment_to_expmoment(2) == pytest.approx(1 / (4 * math.e))
    with pytest.raises(DomainError):
        moment_to_expmoment(0)
    assert expmoment_series(1.0) <= 1.0


def test_moment_to_tail_first_order():
    t = 1.3
    res = moment_to_tail([1.0], 2, 2, t)
    assert res.raw == pytest.approx(2 * math.exp(-math.log(2) / (2 * math.e**2) * t * t), rel=1e-14)
    assert moment_to_tail([1.0], 2, 2, 0.0).bound == 1.0


def _reference_tail(C, p, q, t):
    # independent re-implementation of the min over active orders
    ks = [k + 1 for k, c in enumerate(C) if c > 0]
    eta = min(t ** (p / k) / C[k - 1] for k in ks)
    return 2 * math.exp(-math.log(2) * (len(ks) * math.e) ** (-p / min(ks)) * eta / q)


@given(st.floats(0.01, 50))
def test_moment_to_tail_second_order(t):
    res = moment_to_tail([1.0, 1.0], 2, 2, t)
    ref = 2 * math.exp(-math.log(2) / (2 * math.e) ** 2 * min(t * t, t) / 2)
    assert res.raw == pytest.approx(ref, rel=1e-12)
    assert res.raw == pytest.approx(_reference_tail([1.0, 1.0], 2, 2, t), rel=1e-12)
    assert res.bound == min(1.0, res.raw)


def test_moment_to_tail_errors():
    with pytest.raises(DomainError):
        moment_to_tail([0.0, 0.0], 2, 2, 1.0)
