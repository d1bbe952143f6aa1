"""Concentration experiments on l_p spheres: Lipschitz tails, LS_q, polynomials, quadratic forms."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from scipy import stats

from .. import certificates as certs
from ..errors import ConfigurationError, DomainError
from ..exact_moments import exact_moment_cone, second_moment_cone
from ..sampling import RngState, sample_cone_blocks, self_normalized_mean, surface_density
from .results import TailExperimentResult, tail_result

_TAG_LIPSCHITZ = 11
_TAG_LSQ = 12
_TAG_POLY = 13
_TAG_HW = 14
_TAG_PERM = 15


def _cone(p: float, n: int, replicas: int, rng: RngState, *tags: int) -> np.ndarray:
    return sample_cone_blocks(p, n, replicas, rng.child(*tags))


def _default_grid(stat: np.ndarray, points: int = 25) -> np.ndarray:
    top = float(np.max(stat)) if stat.size else 0.0
    return np.linspace(0.0, top if top > 0 else 1.0, points)


# --------------------------------------------------------------------------
# Lipschitz functions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LipschitzFunction:
    """Test function with a certified Lipschitz constant w.r.t. |.|_p on the sphere.

    ``f`` maps an ``(m, n)`` array to ``m`` values; ``lipschitz(p, n)`` returns
    the constant; ``mean(p, n)``, when given, is the exact cone-measure mean.
    """

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    lipschitz: Callable[[float, int], float]
    mean: Optional[Callable[[float, int], float]] = None


def _l2_lipschitz(p: float, n: int) -> float:
    # |x|_2 <= n^(1/2-1/p) |x|_p on R^n
    return float(n ** (0.5 - 1.0 / p))


LIPSCHITZ_FUNCTIONS: Dict[str, LipschitzFunction] = {
    "coordinate": LipschitzFunction("coordinate", lambda th: th[:, 0], lambda p, n: 1.0, lambda p, n: 0.0),
    "l2norm": LipschitzFunction("l2norm", lambda th: np.sqrt(np.sum(th * th, axis=1)), _l2_lipschitz),
    "maxabs": LipschitzFunction("maxabs", lambda th: np.max(np.abs(th), axis=1), lambda p, n: 1.0),
    "constant": LipschitzFunction("constant", lambda th: np.ones(th.shape[0]), lambda p, n: 1.0,
                                  lambda p, n: 1.0),
}


def lipschitz_function(name: str) -> LipschitzFunction:
    try:
        return LIPSCHITZ_FUNCTIONS[name]
    except KeyError:
        raise ConfigurationError(f"unknown test function {name!r}; choose from {sorted(LIPSCHITZ_FUNCTIONS)}") from None


def run_lipschitz_tails(p: float, n: int, measure: str = "cone", f="coordinate", replicas: int = 10_000,
                        t_grid: Optional[Sequence[float]] = None, rng: RngState = RngState(0)) -> TailExperimentResult:
    """Tails of |f - mean f| for a 1-Lipschitz f under the cone or surface measure.

    ``f`` is divided by its certified Lipschitz constant first.  Under the
    surface measure the tail and the centring use importance weights.
    """
    if measure not in ("cone", "surface"):
        raise ConfigurationError("measure must be 'cone' or 'surface'")
    fn = lipschitz_function(f) if isinstance(f, str) else f
    theta = _cone(p, n, replicas, rng, _TAG_LIPSCHITZ, n)
    L = fn.lipschitz(p, n)
    values = np.asarray(fn.f(theta), dtype=float) / L
    if measure == "cone":
        weights = None
        center = fn.mean(p, n) / L if fn.mean is not None else float(np.mean(values))
        cert = certs.cone_lipschitz_certificate(p, n)
    else:
        weights = surface_density(theta, p)
        center = self_normalized_mean(values, weights)[0]
        cert = certs.surface_lipschitz_certificate(p, n)
    stat = np.abs(values - center)
    t_grid = _default_grid(stat) if t_grid is None else t_grid
    return tail_result(f"{measure}_lipschitz", stat, t_grid, cert, n=n, p=p, seed=rng.master_seed,
                       weights=weights, params={"function": fn.name, "measure": measure},
                       diagnostics={"lipschitz_constant": L, "center": float(center)})


# --------------------------------------------------------------------------
# LS_q entropy check
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothFunction:
    """Vectorised f and its ambient gradient, both taking ``(m, n)`` arrays."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]


def _unit_grad(k: int):
    def grad(th):
        g = np.zeros_like(th)
        g[:, k] = 1.0
        return g
    return grad


def _bilinear_grad(th):
    g = np.zeros_like(th)
    g[:, 0] = th[:, 1]
    g[:, 1] = th[:, 0]
    return g


def _exp_grad(th):
    g = np.zeros_like(th)
    g[:, 0] = np.exp(th[:, 0])
    return g


SMOOTH_FUNCTIONS: Dict[str, SmoothFunction] = {
    "coordinate": SmoothFunction("coordinate", lambda th: th[:, 0], _unit_grad(0)),
    "bilinear": SmoothFunction("bilinear", lambda th: 1.0 + th[:, 0] * th[:, 1], _bilinear_grad),
    "exp": SmoothFunction("exp", lambda th: np.exp(th[:, 0]), _exp_grad),
    "constant": SmoothFunction("constant", lambda th: np.ones(th.shape[0]), np.zeros_like),
}


def smooth_function(name: str) -> SmoothFunction:
    try:
        return SMOOTH_FUNCTIONS[name]
    except KeyError:
        raise ConfigurationError(f"unknown smooth function {name!r}; choose from {sorted(SMOOTH_FUNCTIONS)}") from None


@dataclass
class LsqCheckResult:
    p: float
    n: int
    function: str
    replicas: int
    seed: int
    entropy: float
    entropy_stderr: float
    energy: float
    energy_stderr: float
    sigma_q: float
    sigma_q_simplified: float
    bound: float
    passed: bool

    def summary(self) -> dict:
        return {"experiment": "lsq_check", "params": {"p": self.p, "n": self.n, "function": self.function,
                                                      "replicas": self.replicas},
                "seed": self.seed,
                "constants": {"sigma_q": self.sigma_q, "sigma_q_simplified": self.sigma_q_simplified},
                "entropy": self.entropy, "entropy_stderr": self.entropy_stderr,
                "energy": self.energy, "energy_stderr": self.energy_stderr, "bound": self.bound,
                "pass_flags": {"passed": self.passed}}


def entropy_estimate(y: np.ndarray):
    """Plug-in Ent(Y) = E[Y log Y] - E[Y] log E[Y] with its influence-function standard error."""
    y = np.asarray(y, dtype=float)
    m = float(np.mean(y))
    if m <= 0:
        return 0.0, 0.0
    ylogy = np.where(y > 0, y * np.log(np.where(y > 0, y, 1.0)), 0.0)
    ent = float(np.mean(ylogy) - m * math.log(m))
    infl = ylogy - (math.log(m) + 1.0) * y
    return max(ent, 0.0) if abs(ent) < 1e-15 else ent, float(np.std(infl, ddof=1) / np.sqrt(y.size))


def run_lsq_empirical(p: float, n: int, f="coordinate", replicas: int = 10_000,
                      rng: RngState = RngState(0)) -> LsqCheckResult:
    """Monte Carlo check of Ent(|f|^q) <= sigma^q E|grad f|_q^q under the cone measure.

    sigma^q is the sharp Gamma-ratio constant; the simplified
    3 4^q q^(q-1) n^(-1/(p-1)) is reported alongside.  Passes iff the entropy
    is at most 1.1 times the right side plus 3 combined standard errors.
    """
    if replicas < 10_000:
        raise DomainError("the LS_q check needs at least 10^4 replicas")
    fn = smooth_function(f) if isinstance(f, str) else f
    q = certs.conjugate(p)
    theta = _cone(p, n, replicas, rng, _TAG_LSQ, n)
    y = np.abs(fn.f(theta)) ** q
    ent, ent_se = entropy_estimate(y)
    g = np.sum(np.abs(fn.grad(theta)) ** q, axis=1)
    energy = float(np.mean(g))
    energy_se = float(np.std(g, ddof=1) / np.sqrt(replicas))
    sigma_q = certs.cone_sigma_q_exact(p, n)
    bound = sigma_q * energy
    combined = math.hypot(ent_se, 1.1 * sigma_q * energy_se)
    passed = ent <= 1.1 * bound + 3.0 * combined
    return LsqCheckResult(float(p), n, fn.name, replicas, rng.master_seed, ent, ent_se, energy, energy_se,
                          sigma_q, certs.cone_sigma_q(p, n), bound, bool(passed))


# --------------------------------------------------------------------------
# elementary polynomials
# --------------------------------------------------------------------------

def _coefficient_norm(a: np.ndarray, p: float) -> float:
    if p == 2:
        return float(np.max(np.abs(a)))
    r = p / (p - 2.0)
    return float(np.sum(np.abs(a) ** r) ** (1.0 / r))


@dataclass(frozen=True)
class ElementaryPolynomial:
    """Q_m(theta) = sum_j a_j theta_j^m with |a|_{p/(p-2)} <= 1 (max norm at p = 2)."""

    m: int
    a: np.ndarray
    p: float = 2.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 3:
            raise DomainError("m must be an integer >= 3")
        a = np.asarray(self.a, dtype=float)
        object.__setattr__(self, "a", a)
        if _coefficient_norm(a, self.p) > 1.0 + 1e-12:
            raise DomainError("coefficient vector violates the norm constraint")

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def order(self) -> int:
        """d = m - ceil(p) + 1, the derivative order used in the bound."""
        return self.m - math.ceil(self.p) + 1

    def __call__(self, theta: np.ndarray) -> np.ndarray:
        return np.asarray(theta) ** self.m @ self.a

    def exact_mean(self) -> float:
        if self.m % 2:
            return 0.0
        return float(np.sum(self.a) * exact_moment_cone(self.p, self.n, self.m))

    def scale_constant(self) -> Dict[str, float]:
        """Conservative constant c_{m,p} with E exp(c n |Q - EQ|^(p/d)) <= 2.

        The k-th derivative is (m)_k diag(a_j theta_j^(m-k)); its L^q operator
        norm is bounded through the exact cone moments, and the top derivative
        by (m)_d |a|_{p/(p-2)} (d >= 2) or m |a|_inf (d = 1).  Dividing Q - EQ by
        kappa = max(top, max_k H_k / s^(d-k)), s = 3^(1/q) 4 q^(1/p) n^(-1/p),
        meets the hypotheses of the order-d sphere bound, whose constant then
        gives c_{m,p} = c_{p,d} / kappa^(p/d).
        """
        p, n, m, d = self.p, self.n, self.m, self.order
        if not m > p:
            raise DomainError("the polynomial bound needs m > p")
        if n < 3:
            raise DomainError("the polynomial bound needs n >= 3")
        q = certs.conjugate(p)
        s = 3.0 ** (1.0 / q) * 4.0 * q ** (1.0 / p) * n ** (-1.0 / p)
        ratios = []
        for k in range(1, d):
            H = math.perm(m, k) * (np.sum(np.abs(self.a) ** q) * exact_moment_cone(p, n, q * (m - k))) ** (1.0 / q)
            ratios.append(H / s ** (d - k))
        top = math.perm(m, d) * _coefficient_norm(self.a, p) if d >= 2 else m * float(np.max(np.abs(self.a)))
        kappa = max([top] + ratios)
        c_pd = certs.higher_order_constants("cone", p, d)["c"]
        return {"d": d, "kappa": kappa, "c_pd": c_pd, "c_mp": c_pd / kappa ** (p / d)}


@dataclass
class PolynomialResult:
    tails: TailExperimentResult
    exp_moment: float
    exp_moment_stderr: float
    constant: float
    mean: float
    mean_stderr: float
    exact_mean: float

    @property
    def exp_moment_ok(self) -> bool:
        return self.exp_moment <= 2.0 + 3.0 * self.exp_moment_stderr

    @property
    def mean_ok(self) -> bool:
        return abs(self.mean - self.exact_mean) <= 3.0 * self.mean_stderr + 1e-15

    @property
    def passed(self) -> bool:
        return self.tails.passed and self.exp_moment_ok and self.mean_ok


def run_polynomial_tails(p: float, n: int, poly: ElementaryPolynomial, replicas: int = 10_000,
                         rng: RngState = RngState(0), t_grid: Optional[Sequence[float]] = None,
                         c: Optional[float] = None) -> PolynomialResult:
    """Exponential moment and tails of Q_m - E Q_m under the cone measure.

    ``c`` defaults to the conservative constant of
    :meth:`ElementaryPolynomial.scale_constant`; the induced tail bound is
    2 exp(-c n t^(p/d)) by Markov's inequality.
    """
    if poly.p != p or poly.n != n:
        raise ConfigurationError("polynomial was built for a different (p, n)")
    const = poly.scale_constant()
    c = const["c_mp"] if c is None else float(c)
    d = const["d"]
    theta = _cone(p, n, replicas, rng, _TAG_POLY, n, poly.m)
    values = poly(theta)
    exact = poly.exact_mean()
    centered = values - exact
    stat = np.abs(centered)
    e = np.exp(c * n * stat ** (p / d))
    rate = c * n

    cert = certs.BoundCertificate("higher_order_cone", {"p": p, "n": n, "m": poly.m, "d": d},
                                  {"c_mp": c, "kappa": const["kappa"], "c_pd": const["c_pd"]}, 2.0,
                                  lambda t: rate * t ** (p / d))
    t_grid = _default_grid(stat) if t_grid is None else t_grid
    tails = tail_result(f"polynomial_m{poly.m}", stat, t_grid, cert, n=n, p=p, seed=rng.master_seed,
                        params={"m": poly.m, "d": d})
    res = PolynomialResult(tails, float(np.mean(e)), float(np.std(e, ddof=1) / np.sqrt(replicas)), c,
                           float(np.mean(values)), float(np.std(values, ddof=1) / np.sqrt(replicas)), exact)
    tails.diagnostics.update(exp_moment=res.exp_moment, exp_moment_stderr=res.exp_moment_stderr,
                             mean=res.mean, mean_stderr=res.mean_stderr, exact_mean=exact,
                             extra_pass=res.exp_moment_ok and res.mean_ok)
    return res


def polynomial_std_scaling(p: float, m: int, n_list: Sequence[int] = (25, 50, 100, 200),
                           replicas: int = 10_000, rng: RngState = RngState(0)) -> Dict[str, object]:
    """Sample standard deviation of Q_m (all-ones coefficients) across n and its log-log slope."""
    stds = []
    for n in n_list:
        poly = ElementaryPolynomial(m, np.ones(n) if p == 2 else np.ones(n) / _coefficient_norm(np.ones(n), p), p)
        theta = _cone(p, n, replicas, rng, _TAG_POLY, n, m, 1)
        stds.append(float(np.std(poly(theta), ddof=1)))
    slope = float(np.polyfit(np.log(n_list), np.log(stds), 1)[0])
    return {"n_list": list(n_list), "std": stds, "slope": slope}


def polynomial_exchangeability(p: float, n: int, m: int, replicas: int = 10_000,
                               rng: RngState = RngState(0)) -> Dict[str, float]:
    """Two-sample KS test of Q_m with coefficients a against a permutation of a."""
    a = np.linspace(1.0, 2.0, n)
    a /= _coefficient_norm(a, p)
    perm = np.random.Generator(np.random.Philox(np.random.SeedSequence(rng.master_seed, spawn_key=(_TAG_PERM,))))
    a_perm = a[perm.permutation(n)]
    x = ElementaryPolynomial(m, a, p)(_cone(p, n, replicas, rng, _TAG_PERM, n, 0))
    y = ElementaryPolynomial(m, a_perm, p)(_cone(p, n, replicas, rng, _TAG_PERM, n, 1))
    res = stats.ks_2samp(x, y)
    crit = 1.628 * math.sqrt(2.0 / replicas)
    return {"statistic": float(res.statistic), "pvalue": float(res.pvalue), "critical_1pct": crit,
            "passed": bool(res.statistic < crit)}


# --------------------------------------------------------------------------
# quadratic forms
# --------------------------------------------------------------------------

def run_hanson_wright(p: float, n: int, A: np.ndarray, replicas: int = 10_000,
                      t_grid: Optional[Sequence[float]] = None, rng: RngState = RngState(0),
                      constants: str = "derived") -> TailExperimentResult:
    """Tails of |theta^T A theta - tr(A) m_2| under the cone measure.

    The certificate uses the cone LS_q constant; with ``constants="derived"``
    every constant is explicit.  The Monte Carlo mean must match the exact
    centre tr(A) m_2 within 3 standard errors.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (n, n) or not np.allclose(A, A.T, atol=0, rtol=0):
        raise DomainError("A must be a symmetric n x n matrix")
    q = certs.conjugate(p)
    theta = _cone(p, n, replicas, rng, _TAG_HW, n)
    values = np.einsum("ij,jk,ik->i", theta, A, theta)
    center = float(np.trace(A) * second_moment_cone(p, n))
    stat = np.abs(values - center)
    mean = float(np.mean(values))
    mean_se = float(np.std(values, ddof=1) / np.sqrt(replicas))
    sigma = certs.cone_sigma(p, n)
    hs = certs.hs_q_norm(A, q)
    op = certs.op_q_norm(A, p)
    cert = certs.hanson_wright_certificate(p, sigma, hs, op, constants=constants)
    t_grid = _default_grid(stat) if t_grid is None else t_grid
    mean_ok = abs(mean - center) <= 3.0 * mean_se + 1e-12
    return tail_result("hanson_wright", stat, t_grid, cert, n=n, p=p, seed=rng.master_seed,
                       params={"constants": constants},
                       diagnostics={"center": center, "mean": mean, "mean_stderr": mean_se,
                                    "hs_q": hs, "op_q": op, "sigma": sigma, "extra_pass": mean_ok})
