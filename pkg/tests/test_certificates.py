import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conclab import certificates as C
from conclab.errors import ConfigurationError, DomainError

LOG2 = math.log(2)


def test_sudakov_values():
    assert C.cert_sudakov(100, 1, 0.1) == 1.0
    assert C.sudakov_certificate(100, 1).raw(0.1) == pytest.approx(2 * math.exp(-1e4 * 1e-2 / 768))
    b = C.sudakov_certificate(100, 0.5, "theta_bounded", K=1)
    assert b.raw(0.1) == pytest.approx(2 * math.exp(-0.5**4 * 1e4 * 1e-2 / 768))
    assert C.cert_sudakov(100, 1, 0.0) == 1.0
    assert C.sudakov_certificate(100, 1).raw(0.0) == 2.0


def test_sudakov_missing_parameters():
    with pytest.raises(ConfigurationError):
        C.sudakov_certificate(100, 1, "theta_bounded")
    with pytest.raises(ConfigurationError):
        C.sudakov_certificate(100, 1, "x_pointwise")


def test_local_law_rate():
    assert C.cert_local_law_rate(math.e**2, 1, 1) == pytest.approx(2 / math.e)
    assert C.cert_local_law_rate(100, 0.5, 2) == pytest.approx(2 * math.log(100) / (0.0625 * 10))
    n = 1e4
    ratio = C.cert_local_law_rate(4 * n, 0.5, 1) / C.cert_local_law_rate(n, 0.5, 1)
    assert ratio == pytest.approx(math.log(4 * n) / math.log(n) / 2)
    with pytest.raises(DomainError):
        C.cert_local_law_rate(100, 1.5, 1)
    cert = C.local_law_rate_certificate(0.5, 2)
    assert cert.kind == "rate" and cert(100) == pytest.approx(C.cert_local_law_rate(100, 0.5, 2))


def test_lipschitz_lsq_values():
    assert C.lipschitz_lsq_certificate(1, 2).raw(1.2) == pytest.approx(2 * math.exp(-1.44))
    assert C.lipschitz_lsq_certificate(math.sqrt(2), 2).raw(1) == pytest.approx(2 * math.exp(-0.5))
    assert C.lipschitz_lsq_certificate(1, 4 / 3).raw(1) == pytest.approx(2 * math.exp(-(1 / 3) ** 4))
    with pytest.raises(DomainError):
        C.lipschitz_lsq_certificate(1, 1)


def test_cone_lipschitz_values():
    assert C.cone_lipschitz_certificate(2, 100).raw(0.5) == pytest.approx(2 * math.exp(-100 * 0.25 / 96))
    assert C.cone_lipschitz_certificate(4, 10).raw(1) == pytest.approx(1.99997320834131541563, rel=1e-14)
    assert C.cert_cone_lipschitz(2, 100, 0) == 1.0


def test_surface_lipschitz_values():
    assert C.surface_lipschitz_certificate(2, 50).raw(0.7) == pytest.approx(2 * math.exp(-50 * 0.49 / 384))
    assert C.surface_lipschitz_certificate(3, 20).prefactor == pytest.approx(2 * 4 ** (1 / 3))
    assert C.cert_surface_lipschitz(3, 20, 0) == 1.0


def test_higher_order_constants():
    assert C.higher_order_constants("rn", 2, 2)["C"] == pytest.approx(2.03194514751575030e-3, rel=1e-12)
    assert C.higher_order_constants("rn", 2, 2)["c"] == pytest.approx(7.96858116981104716e-3, rel=1e-12)
    cone = C.higher_order_constants("cone", 3, 2)
    surf = C.higher_order_constants("surface", 3, 2)
    assert surf["C"] == pytest.approx(cone["C"] / 2) and surf["c"] == pytest.approx(cone["c"] / 2)


@pytest.mark.parametrize("setting", C.HIGHER_ORDER_SETTINGS)
@pytest.mark.parametrize("p", [2.0, 3.0, 4.0])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_log_and_direct_constants_agree(setting, p, d):
    a = C.higher_order_constants(setting, p, d, "log")
    b = C.higher_order_constants(setting, p, d, "direct")
    for k in a:
        assert a[k] == pytest.approx(b[k], rel=1e-12)


def test_higher_order_certificate_shape():
    d1 = C.higher_order_certificate("rn", 2, 1, 1.0, [2.0])
    K = C.higher_order_constants("rn", 2, 1)["C"]
    assert d1.raw(3.0) == pytest.approx(2 * math.exp(-K * (3 / 2) ** 2))
    surf = C.higher_order_certificate("surface", 3, 2, 30, [1.0, 1.0])
    assert surf.prefactor == pytest.approx(math.sqrt(2) * 4 ** (1 / 2 - 1 / 3))
    with pytest.raises(ConfigurationError):
        C.higher_order_certificate("rn", 2, 2, 1.0, [1.0])
    with pytest.raises(ConfigurationError):
        C.higher_order_certificate("rn", 2, 0, 1.0, [])


def test_exp_moment_scales():
    rn = C.cert_exp_moment_higher_order("rn", 2, 2, 2.0)
    assert rn["scale"] == pytest.approx(rn["c"] / 4)
    cone = C.cert_exp_moment_higher_order("cone", 3, 2, 40)
    assert cone["scale"] == pytest.approx(cone["c"] * 40) and cone["rhs"] == 2
    surf = C.cert_exp_moment_higher_order("surface", 3, 2, 40)
    assert surf["c"] == pytest.approx(cone["c"] / 2)
    assert surf["rhs"] == pytest.approx(math.sqrt(2) * 4 ** (1 / 2 - 1 / 3))


def test_sigma_constants():
    assert C.cone_sigma_q(2, 10) == pytest.approx(3 * 16 * 2 / 10)
    assert C.cone_sigma(2, 10) ** 2 == pytest.approx(C.cone_sigma_q(2, 10))
    assert C.cone_sigma_q_exact(3, 20) <= C.cone_sigma_q(3, 20)


def test_matrix_norms():
    n = 7
    assert C.hs_q_norm(np.eye(n), 2) == pytest.approx(math.sqrt(n))
    assert C.op_q_norm(np.eye(n), 2) == pytest.approx(1.0)
    A = np.diag(np.arange(1.0, 5.0))
    assert C.op_q_norm(A, 4) == pytest.approx(np.sum(np.arange(1.0, 5.0) ** 2) ** 0.5)


def test_op_q_norm_is_upper_bound():
    rng = np.random.default_rng(0)
    p = 4.0
    A = rng.standard_normal((6, 6))
    A = A + A.T
    bound = C.op_q_norm(A, p)
    for _ in range(2000):
        x, y = rng.standard_normal(6), rng.standard_normal(6)
        x /= np.sum(np.abs(x) ** p) ** (1 / p)
        y /= np.sum(np.abs(y) ** p) ** (1 / p)
        assert x @ A @ y <= bound * (1 + 1e-12)


def test_hanson_wright_regimes():
    n, p = 50, 2.0
    cert = C.hanson_wright_certificate(p, 1.0, math.sqrt(n), 1.0, "rate")
    small, large = 0.5, 1e4
    hs = lambda t: (t / math.sqrt(n)) ** p
    op = lambda t: (t / 1.0) ** (p / 2)
    assert hs(small) < op(small) and op(large) < hs(large)
    assert cert.raw(small) == pytest.approx(2 * math.exp(-hs(small)))
    assert cert.raw(large) == pytest.approx(2 * math.exp(-op(large)))
    derived = C.hanson_wright_certificate(p, 1.0, math.sqrt(n), 1.0, "derived")
    assert derived.kind == "bound" and derived.constants["hess_norm"] == 2.0


def test_symmetric_certificates():
    th = C.symmetric_fn_certificate(1.0, 1.0, 1.0)
    assert th.prefactor == 2 and th.raw(3.0) == pytest.approx(2 * math.exp(-3.0)) and th.kind == "rate"
    alt = C.symmetric_fn_certificate(1.0, 1.0, 1.0, "alternative")
    assert alt.raw(100.0) == pytest.approx(5 * math.exp(-100 / 78))
    assert C.cert_symmetric_fn(1.0, 1.0, 1.0, 0.0) == 1.0
    zero_cubic = C.symmetric_fn_certificate(24.0, 0.0, 1 / 12, "alternative", n=30)
    assert zero_cubic.constants["rate"] == pytest.approx(1 / 156)


def test_factory():
    assert C.make_certificate("cone_lipschitz", p=2, n=100).raw(0.5) == pytest.approx(
        2 * math.exp(-100 * 0.25 / 96))
    with pytest.raises(ConfigurationError):
        C.make_certificate("nonsense")
    with pytest.raises(ConfigurationError):
        C.make_certificate("cone_lipschitz", p=2)
    rec = C.make_certificate("sudakov_theta", n=10, v=1).to_record([0.0, 1.0])
    assert rec["grid"][0] == [0.0, 1.0] and rec["kind"] == "bound"


CERTS = [
    C.sudakov_certificate(40, 0.5),
    C.sudakov_certificate(40, 0.5, "x_pointwise", r=math.sqrt(2), max_theta=0.4),
    C.cone_lipschitz_certificate(3, 20),
    C.surface_lipschitz_certificate(4, 20),
    C.higher_order_certificate("cone", 4, 3, 20, [0.3, 1.0, 2.0]),
    C.hanson_wright_certificate(4, 0.5, 3.0, 1.0, "derived"),
    C.symmetric_fn_certificate(2.0, 0.5, 0.3, "alternative", n=10),
]


@pytest.mark.parametrize("cert", CERTS, ids=lambda c: c.theorem_id)
def test_monotone_and_capped(cert):
    grid = np.linspace(0, 20, 100)
    vals = cert(grid)
    assert np.all(np.diff(vals) <= 1e-15)
    assert np.all(vals <= 1.0) and np.all(vals == np.minimum(cert.raw(grid), 1.0))


@given(st.floats(0, 100))
def test_negative_t_rejected_and_values_in_unit_interval(t):
    for cert in CERTS:
        assert 0 <= cert(t) <= 1
    with pytest.raises(DomainError):
        CERTS[0](-1.0)
