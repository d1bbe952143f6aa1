import numpy as np
import pytest
from hypothesis import given, strategies as st

from conclab.errors import DomainError
from conclab.sampling import RngState, sample_haar_so
from conclab.weights import (build_theta, check_weight_matrix, hadamard_row_sum_deviation,
                             max_weight_tail_certificate, max_weight_threshold)


def test_identity_weights():
    assert np.array_equal(build_theta(np.eye(4)), np.eye(4))


def test_planar_rotation_weights():
    a = 0.3
    c, s = np.cos(a), np.sin(a)
    theta = build_theta(np.array([[c, -s], [s, c]]))
    assert np.allclose(theta, [[abs(c), abs(s)], [abs(s), abs(c)]], atol=1e-15)
    assert hadamard_row_sum_deviation(theta) < 1e-15


@given(st.integers(2, 60), st.integers(0, 2**32))
def test_hadamard_square_doubly_stochastic(n, seed):
    theta = build_theta(sample_haar_so(n, RngState(seed)))
    check_weight_matrix(theta)
    assert np.all(theta >= 0)


def test_rejects_non_orthogonal():
    with pytest.raises(DomainError):
        build_theta(np.ones((3, 3)))


def test_max_weight_certificate_values():
    assert max_weight_tail_certificate(100, np.sqrt(40)).simplified == pytest.approx(5.046265044040320e-07,
                                                                                   rel=1e-12)
    assert max_weight_tail_certificate(50, 6).bound == pytest.approx(3.009011112254700e-05, rel=1e-12)
    assert max_weight_tail_certificate(50, 0).bound == 1.0
    assert max_weight_tail_certificate(50, 1e-9).bound == 1.0


def test_threshold():
    assert max_weight_threshold(100, 2) == pytest.approx(2 * np.sqrt(np.log(100) / 100))


@given(st.integers(4, 10_000), st.floats(0.01, 20), st.floats(0.01, 20))
def test_certificate_nonincreasing_in_t(n, a, b):
    lo, hi = sorted((a, b))
    assert max_weight_tail_certificate(n, hi).bound <= max_weight_tail_certificate(n, lo).bound


def test_mean_max_weight_scaling():
    for n in (20, 50, 100, 200):
        m = np.mean([build_theta(sample_haar_so(n, RngState(1, r)), False).max() for r in range(200)])
        assert 0.3 <= m / np.sqrt(np.log(n) / n) <= 3
