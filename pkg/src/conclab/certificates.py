"""Closed-form concentration certificates.

Each certificate is a tail function ``t -> prefactor * exp(-E(t))`` with a
nondecreasing exponent ``E``, packaged together with the named constants it
was built from.  ``kind`` is ``"bound"`` when every constant is explicit and
``"rate"`` when an absolute constant of unknown value was set to a default.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError

LOG2 = math.log(2.0)

THEOREM_IDS = (
    "sudakov_theta", "sudakov_theta_bounded", "sudakov_x_mean", "sudakov_x_pointwise",
    "local_law_rate", "lipschitz_lsq", "cone_lipschitz", "surface_lipschitz",
    "higher_order_rn", "higher_order_cone", "higher_order_surface",
    "hanson_wright_lsq", "symmetric_fn",
)


@dataclass(frozen=True)
class BoundCertificate:
    """A named tail bound t -> prefactor * exp(-exponent(t)).

    Calling the certificate returns the bound capped at 1; :meth:`raw` keeps
    the uncapped value for plotting.
    """

    theorem_id: str
    params: Dict[str, object]
    constants: Dict[str, float]
    prefactor: float
    exponent: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    kind: str = "bound"
    variable: str = "t"
    capped: bool = True

    def __post_init__(self):
        if self.theorem_id not in THEOREM_IDS:
            raise ConfigurationError(f"unknown theorem id {self.theorem_id!r}")
        if self.kind not in ("bound", "rate"):
            raise ConfigurationError("kind must be 'bound' or 'rate'")

    def raw(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0):
            raise DomainError(f"{self.variable} must be nonnegative")
        out = self.prefactor * np.exp(-np.asarray(self.exponent(t_arr), dtype=float))
        return float(out) if out.ndim == 0 else out

    def __call__(self, t):
        out = self.raw(t)
        return np.minimum(out, 1.0) if self.capped else out

    def to_record(self, grid: Sequence[float]) -> dict:
        grid = [float(x) for x in grid]
        values = np.atleast_1d(self(np.asarray(grid)))
        return {
            "theorem_id": self.theorem_id,
            "kind": self.kind,
            "params": dict(self.params),
            "constants": {k: float(v) for k, v in self.constants.items()},
            "grid": [[x, float(b)] for x, b in zip(grid, values)],
        }


def _check_p(p: float) -> float:
    p = float(p)
    if not np.isfinite(p) or p < 2:
        raise DomainError("p must be a finite real >= 2")
    return p


def conjugate(p: float) -> float:
    """Holder conjugate q = p/(p-1)."""
    return p / (p - 1.0)


def _check_n(n: int, minimum: int = 3) -> int:
    if int(n) != n or n < minimum:
        raise DomainError(f"n must be an integer >= {minimum}")
    return int(n)


# --------------------------------------------------------------------------
# weighted random matrices
# --------------------------------------------------------------------------

SUDAKOV_VARIANTS = {
    "theta": "sudakov_theta",
    "theta_bounded": "sudakov_theta_bounded",
    "x_mean": "sudakov_x_mean",
    "x_pointwise": "sudakov_x_pointwise",
}


def sudakov_certificate(n: int, v: float, variant: str = "theta", K: Optional[float] = None,
                        r: Optional[float] = None, max_theta: Optional[float] = None) -> BoundCertificate:
    """Sub-Gaussian tails of Stieltjes transforms of weighted matrices.

    ``theta``          2 exp(-|v|^4 n^2 t^2 / 768)         (averaged over X, fluctuating weights)
    ``theta_bounded``  2 exp(-|v|^4 n^2 t^2 / (768 K^2))   (entries bounded by K)
    ``x_mean``         2 exp(-|v|^4 n^2 t^2 / (4 r^2))     (averaged over weights, fluctuating X)
    ``x_pointwise``    2 exp(-|v|^4 n t^2 / (4 r^2 max Theta^2)), max Theta defaulting to 1
    """
    n = _check_n(n)
    v = float(v)
    if v == 0:
        raise DomainError("Im z must be nonzero")
    if variant not in SUDAKOV_VARIANTS:
        raise ConfigurationError(f"unknown Sudakov variant {variant!r}; choose from {sorted(SUDAKOV_VARIANTS)}")
    v4 = v**4
    params = {"n": n, "v": v, "variant": variant}
    if variant == "theta":
        rate = v4 * n * n / 768.0
    elif variant == "theta_bounded":
        if K is None:
            raise ConfigurationError("variant 'theta_bounded' needs the entry bound K")
        if K <= 0:
            raise DomainError("K must be positive")
        params["K"] = float(K)
        rate = v4 * n * n / (768.0 * K * K)
    else:
        if r is None:
            raise ConfigurationError(f"variant {variant!r} needs the concentration constant r")
        if r <= 0:
            raise DomainError("r must be positive")
        params["r"] = float(r)
        if variant == "x_mean":
            rate = v4 * n * n / (4.0 * r * r)
        else:
            mt = 1.0 if max_theta is None else float(max_theta)
            if not 0 < mt <= 1:
                raise DomainError("max Theta must lie in (0, 1]")
            params["max_theta"] = mt
            rate = v4 * n / (4.0 * r * r * mt * mt)
    return BoundCertificate(SUDAKOV_VARIANTS[variant], params, {"rate": rate}, 2.0,
                            lambda t: rate * t * t)


def cert_sudakov(n: int, v: float, t, variant: str = "theta", K: Optional[float] = None,
                 r: Optional[float] = None, max_theta: Optional[float] = None):
    return sudakov_certificate(n, v, variant, K=K, r=r, max_theta=max_theta)(t)


def cert_local_law_rate(n, v: float, m3: float, c: float = 1.0):
    """Local-law rate c m3 log(n) / (|v|^4 sqrt(n)).

    The absolute constant c is unknown, so this is a rate for trend fitting
    and not a bound.
    """
    v = float(v)
    if v == 0 or abs(v) > 1:
        raise DomainError("the local-law rate needs 0 < |Im z| <= 1")
    if not np.isfinite(m3) or m3 < 0:
        raise DomainError("m3 must be finite and nonnegative")
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 4):
        raise DomainError("the local-law rate needs n >= 4")
    out = c * m3 * np.log(n_arr) / (v**4 * np.sqrt(n_arr))
    return float(out) if out.ndim == 0 else out


def local_law_rate_certificate(v: float, m3: float, c: float = 1.0) -> BoundCertificate:
    """The local-law rate as a function of n, packaged for serialisation."""
    cert_local_law_rate(4, v, m3, c)
    scale = c * m3 / v**4
    return BoundCertificate("local_law_rate", {"v": float(v), "m3": float(m3)}, {"c": float(c)}, 1.0,
                            lambda n: -np.log(scale * np.log(n) / np.sqrt(n)),
                            kind="rate", variable="n", capped=False)


# --------------------------------------------------------------------------
# first order (Lipschitz) bounds
# --------------------------------------------------------------------------

def lipschitz_lsq_certificate(sigma: float, q: float) -> BoundCertificate:
    """2 exp(-((q-1)/sigma)^p t^p) for 1-Lipschitz functions under LS_q(sigma^q)."""
    if not 1 < q <= 2:
        raise DomainError("q must lie in (1, 2]")
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    p = q / (q - 1.0)
    rate = ((q - 1.0) / sigma) ** p
    return BoundCertificate("lipschitz_lsq", {"sigma": float(sigma), "q": float(q)},
                            {"p": p, "rate": rate}, 2.0, lambda t: rate * t**p)


def cert_lipschitz_lsq(sigma: float, q: float, t):
    return lipschitz_lsq_certificate(sigma, q)(t)


def cone_lipschitz_certificate(p: float, n: int) -> BoundCertificate:
    """2 exp(-(q-1)^p / (3^(p-1) 4^p q) n t^p) under the cone measure."""
    p = _check_p(p)
    n = _check_n(n)
    q = conjugate(p)
    const = (q - 1.0) ** p / (3.0 ** (p - 1.0) * 4.0**p * q)
    return BoundCertificate("cone_lipschitz", {"p": p, "n": n}, {"c": const},
                            2.0, lambda t: const * n * t**p)


def cert_cone_lipschitz(p: float, n: int, t):
    return cone_lipschitz_certificate(p, n)(t)


def surface_lipschitz_certificate(p: float, n: int) -> BoundCertificate:
    """2 (p+1)^(1-2/p) exp(-(q-1)^p / (3^(p-1) 8^p q) n t^p) under the surface measure."""
    p = _check_p(p)
    n = _check_n(n)
    q = conjugate(p)
    const = (q - 1.0) ** p / (3.0 ** (p - 1.0) * 8.0**p * q)
    pref = 2.0 * (p + 1.0) ** (1.0 - 2.0 / p)
    return BoundCertificate("surface_lipschitz", {"p": p, "n": n}, {"c": const, "prefactor": pref},
                            pref, lambda t: const * n * t**p)


def cert_surface_lipschitz(p: float, n: int, t):
    return surface_lipschitz_certificate(p, n)(t)


# --------------------------------------------------------------------------
# LS_q constants
# --------------------------------------------------------------------------

def pgauss_sigma_q(p: float) -> float:
    """LS_q constant sigma^q = 2^q q^(q-1) of the p-generalized Gaussian law."""
    q = conjugate(_check_p(p))
    return 2.0**q * q ** (q - 1.0)


def cone_sigma_q(p: float, n: int) -> float:
    """Simplified LS_q constant sigma^q = 3 4^q q^(q-1) n^(-1/(p-1)) of the cone measure (n >= 3)."""
    p = _check_p(p)
    n = _check_n(n)
    q = conjugate(p)
    return 3.0 * 4.0**q * q ** (q - 1.0) * n ** (-1.0 / (p - 1.0))


def cone_sigma_q_exact(p: float, n: int) -> float:
    """Sharper cone LS_q constant 4^q q^(q-1) Gamma((n-q)/p) / (p^(q/p) Gamma(n/p))."""
    from .exact_moments import exact_neg_moment_pgauss

    p = _check_p(p)
    q = conjugate(p)
    return 4.0**q * q ** (q - 1.0) * exact_neg_moment_pgauss(p, n, q)


def cone_sigma(p: float, n: int) -> float:
    """sigma with sigma^q = :func:`cone_sigma_q`; sigma^p = 3^(p-1) 4^p q / n."""
    return cone_sigma_q(p, n) ** (1.0 / conjugate(p))


# --------------------------------------------------------------------------
# higher order bounds
# --------------------------------------------------------------------------

HIGHER_ORDER_SETTINGS = ("rn", "cone", "surface")


def _check_pd(p: float, d: int) -> tuple:
    p = _check_p(p)
    if int(d) != d or d < 1:
        raise ConfigurationError("order d must be an integer >= 1")
    return p, int(d)


def _log_tail_constant(setting: str, p: float, d: int) -> float:
    if setting == "rn":
        return (p * math.log(LOG2) - (p - 1) * math.log(4) - math.log(p) - (p - 1) * math.log(p - 1)
                - p * math.log(d) - p)
    log_c = (p * math.log(LOG2) - (p - 1) * math.log(3) - (2 * p - 1) * math.log(4) - 2 * math.log(p)
             - (p - 1) * math.log(p - 1) - p * math.log(d) - p)
    return log_c - (LOG2 if setting == "surface" else 0.0)


def _log_exp_constant(setting: str, p: float, d: int) -> float:
    base = (p - 1) * math.log(LOG2 * (p ** (1 / (p - 1)) - (p - 1) ** (1 / (p - 1))))
    if setting == "rn":
        return base - (2 * p - 1) * LOG2 - 2 * math.log(p) - (p - 1) * math.log(p - 1) - 1
    log_c = (base - (p - 1) * math.log(3) - (4 * p - 1) * LOG2 - 3 * math.log(p)
             - (p - 2) * math.log(p - 1) - 1)
    return log_c - (LOG2 if setting == "surface" else 0.0)


def _direct_tail_constant(setting: str, p: float, d: int) -> float:
    e = math.e
    if setting == "rn":
        return LOG2**p / (4 ** (p - 1) * p * (p - 1) ** (p - 1) * d**p * e**p)
    c = LOG2**p / (3 ** (p - 1) * 4 ** (2 * p - 1) * p**2 * (p - 1) ** (p - 1) * d**p * e**p)
    return c / 2 if setting == "surface" else c


def _direct_exp_constant(setting: str, p: float, d: int) -> float:
    num = (LOG2 * (p ** (1 / (p - 1)) - (p - 1) ** (1 / (p - 1)))) ** (p - 1)
    if setting == "rn":
        return num / (2 ** (2 * p - 1) * p**2 * (p - 1) ** (p - 1) * math.e)
    c = num / (3 ** (p - 1) * 2 ** (4 * p - 1) * p**3 * (p - 1) ** (p - 2) * math.e)
    return c / 2 if setting == "surface" else c


def higher_order_constants(setting: str, p: float, d: int, method: str = "log") -> Dict[str, float]:
    """Explicit constants of the order-d concentration bounds.

    Returns ``C`` (tail exponent) and ``c`` (exponential moment); for the
    surface setting both are already halved.  ``method`` selects log-space or
    direct evaluation, which must agree.
    """
    if setting not in HIGHER_ORDER_SETTINGS:
        raise ConfigurationError(f"unknown setting {setting!r}; choose from {HIGHER_ORDER_SETTINGS}")
    p, d = _check_pd(p, d)
    if method == "log":
        return {"C": math.exp(_log_tail_constant(setting, p, d)),
                "c": math.exp(_log_exp_constant(setting, p, d))}
    if method == "direct":
        return {"C": _direct_tail_constant(setting, p, d), "c": _direct_exp_constant(setting, p, d)}
    raise ConfigurationError("method must be 'log' or 'direct'")


def _higher_order_prefactor(setting: str, p: float) -> float:
    if setting == "surface":
        return math.sqrt(2.0) * (p + 1.0) ** (0.5 - 1.0 / p)
    return 2.0


def _scale(setting: str, p: float, n_or_sigma: float) -> float:
    if setting == "rn":
        if n_or_sigma <= 0:
            raise DomainError("sigma must be positive")
        return 1.0 / float(n_or_sigma) ** p
    return float(_check_n(n_or_sigma))


def higher_order_certificate(setting: str, p: float, d: int, n_or_sigma: float,
                             norms: Sequence[float]) -> BoundCertificate:
    """Order-d tail bound for a mean-zero C^d function.

    ``norms[k-1]`` is the L^q norm of the k-th derivative's q-operator norm for
    k < d and ``norms[d-1]`` its sup norm.  ``n_or_sigma`` is sigma in the
    ``rn`` setting and n on the sphere, where the LS_q constant is implied.
    The tail is prefactor * exp(-K min_k (t / norms[k-1])^(p/k)) with
    K = C / sigma^p or K = C n.
    """
    p, d = _check_pd(p, d)
    if norms is None or len(norms) != d:
        raise ConfigurationError(f"expected {d} derivative norms, got {0 if norms is None else len(norms)}")
    norms_arr = np.asarray(norms, dtype=float)
    if np.any(norms_arr <= 0):
        raise DomainError("derivative norms must be positive")
    consts = higher_order_constants(setting, p, d)
    K = consts["C"] * _scale(setting, p, n_or_sigma)
    powers = p / np.arange(1, d + 1)

    def exponent(t):
        t = np.asarray(t, dtype=float)
        terms = (t[..., None] / norms_arr) ** powers
        return K * np.min(terms, axis=-1)

    key = "n" if setting != "rn" else "sigma"
    return BoundCertificate(f"higher_order_{setting}",
                            {"p": p, "d": d, key: float(n_or_sigma), "norms": [float(x) for x in norms_arr]},
                            {"C": consts["C"], "scale": K}, _higher_order_prefactor(setting, p), exponent)


def cert_higher_order(setting: str, p: float, d: int, n_or_sigma: float, norms: Sequence[float], t):
    return higher_order_certificate(setting, p, d, n_or_sigma, norms)(t)


def cert_exp_moment_higher_order(setting: str, p: float, d: int, n_or_sigma: float) -> Dict[str, float]:
    """Exponential-moment constant c_{p,d} and the full exponent scale.

    The bound reads E exp(scale |f|^(p/d)) <= rhs, with scale = c / sigma^p in
    R^n and c n on the sphere; rhs is 2, or sqrt(2) (p+1)^(1/2-1/p) for the
    surface measure.
    """
    p, d = _check_pd(p, d)
    c = higher_order_constants(setting, p, d)["c"]
    rhs = 2.0 if setting != "surface" else math.sqrt(2.0) * (p + 1.0) ** (0.5 - 1.0 / p)
    return {"c": c, "scale": c * _scale(setting, p, n_or_sigma), "rhs": rhs}


# --------------------------------------------------------------------------
# quadratic forms
# --------------------------------------------------------------------------

def hs_q_norm(A: np.ndarray, q: float) -> float:
    """(sum_ij |a_ij|^q)^(1/q)."""
    A = np.asarray(A, dtype=float)
    return float(np.sum(np.abs(A) ** q) ** (1.0 / q))


def op_q_norm(A: np.ndarray, p: float) -> float:
    """Upper bound on sup { x^T A y : |x|_p, |y|_p <= 1 }.

    Exact for p = 2 (spectral norm) and for diagonal A (|diag|_{p/(p-2)});
    otherwise min(n^(1-2/p) ||A||_2, ||A||_HS(q)), both valid upper bounds.
    """
    p = _check_p(p)
    A = np.asarray(A, dtype=float)
    if p == 2:
        return float(np.linalg.norm(A, 2))
    if np.count_nonzero(A - np.diag(np.diag(A))) == 0:
        r = p / (p - 2.0)
        return float(np.sum(np.abs(np.diag(A)) ** r) ** (1.0 / r))
    n = A.shape[0]
    return float(min(n ** (1.0 - 2.0 / p) * np.linalg.norm(A, 2), hs_q_norm(A, conjugate(p))))


def hanson_wright_certificate(p: float, sigma: float, A_hs_q: float, A_op_q: float,
                              constants: str = "rate", c_p: float = 1.0) -> BoundCertificate:
    """Two-regime tail of a centred quadratic form under LS_q(sigma^q).

    ``constants="rate"`` evaluates 2 exp(-c_p min((t/(sigma^2 HS))^p, (t/(sigma^2 op))^(p/2)))
    with the unspecified c_p (default 1).  ``constants="derived"`` is a fully
    explicit version (derived constants, conservative): the gradient norm is
    bounded through the Poincare-type inequality by (4/log 2)^(1/q) 2 sigma HS,
    the Hessian is 2A, and the order-2 bound in R^n is applied.
    """
    p = _check_p(p)
    if sigma <= 0 or A_hs_q <= 0 or A_op_q <= 0:
        raise DomainError("sigma and the matrix norms must be positive")
    params = {"p": p, "sigma": float(sigma), "A_hs_q": float(A_hs_q), "A_op_q": float(A_op_q),
              "constants": constants}
    if constants == "rate":
        s2 = sigma * sigma

        def exponent(t):
            return c_p * np.minimum((t / (s2 * A_hs_q)) ** p, (t / (s2 * A_op_q)) ** (p / 2.0))

        return BoundCertificate("hanson_wright_lsq", params, {"c_p": float(c_p)}, 2.0, exponent, kind="rate")
    if constants == "derived":
        q = conjugate(p)
        grad = (4.0 / LOG2) ** (1.0 / q) * 2.0 * sigma * A_hs_q
        hess = 2.0 * A_op_q
        inner = higher_order_certificate("rn", p, 2, sigma, [grad, hess])
        return BoundCertificate("hanson_wright_lsq", params,
                                {"C_p2": inner.constants["C"], "grad_norm": grad, "hess_norm": hess},
                                2.0, inner.exponent)
    raise ConfigurationError("constants must be 'rate' or 'derived'")


def cert_hanson_wright(p: float, sigma: float, A_hs_q: float, A_op_q: float, t,
                       constants: str = "rate", c_p: float = 1.0):
    return hanson_wright_certificate(p, sigma, A_hs_q, A_op_q, constants, c_p)(t)


# --------------------------------------------------------------------------
# symmetric functions
# --------------------------------------------------------------------------

def symmetric_fn_certificate(B: float, B_star: float, gamma: float, variant: str = "theorem",
                             c: float = 1.0, n: Optional[int] = None) -> BoundCertificate:
    """Tail of n |h_n - h_inf| for symmetric functionals on the round sphere.

    ``theorem``      2 exp(-c min(1/B*, 1/(gamma B)) t), c unknown (default 1, a rate);
    ``alternative``  5 exp(-min(2/(3 B*), 1/(78 gamma B)) t') with explicit constants.

    The alternative form controls (n-1)|h_n - h_inf|; when ``n`` is given it is
    rescaled to the statistic n|h_n - h_inf| by t' = t (n-1)/n.  B* = 0 means
    the cubic term is absent and drops out of the minimum.
    """
    if B <= 0 or gamma <= 0 or B_star < 0:
        raise DomainError("B and gamma must be positive and B* nonnegative")
    inv_star = math.inf if B_star == 0 else 1.0 / B_star
    params = {"B": float(B), "B_star": float(B_star), "gamma": float(gamma), "variant": variant}
    if variant == "theorem":
        rate = c * min(inv_star, 1.0 / (gamma * B))
        return BoundCertificate("symmetric_fn", params, {"c": float(c), "rate": rate}, 2.0,
                                lambda t: rate * t, kind="rate")
    if variant == "alternative":
        rate = min(2.0 * inv_star / 3.0, 1.0 / (78.0 * gamma * B))
        factor = 1.0
        if n is not None:
            n = _check_n(n)
            params["n"] = n
            factor = (n - 1.0) / n
        return BoundCertificate("symmetric_fn", params, {"rate": rate, "rescale": factor}, 5.0,
                                lambda t: rate * factor * t)
    raise ConfigurationError("variant must be 'theorem' or 'alternative'")


def cert_symmetric_fn(B: float, B_star: float, gamma: float, t, variant: str = "theorem",
                      c: float = 1.0, n: Optional[int] = None):
    return symmetric_fn_certificate(B, B_star, gamma, variant, c, n)(t)


# --------------------------------------------------------------------------
# factory
# --------------------------------------------------------------------------

def make_certificate(theorem_id: str, **params) -> BoundCertificate:
    """Build any certificate from its theorem id and keyword parameters."""
    try:
        if theorem_id in ("sudakov_theta", "sudakov_theta_bounded", "sudakov_x_mean", "sudakov_x_pointwise"):
            variant = theorem_id[len("sudakov_"):]
            return sudakov_certificate(params.pop("n"), params.pop("v"), variant, **params)
        if theorem_id == "local_law_rate":
            return local_law_rate_certificate(params.pop("v"), params.pop("m3"), **params)
        if theorem_id == "lipschitz_lsq":
            return lipschitz_lsq_certificate(params.pop("sigma"), params.pop("q"))
        if theorem_id == "cone_lipschitz":
            return cone_lipschitz_certificate(params.pop("p"), params.pop("n"))
        if theorem_id == "surface_lipschitz":
            return surface_lipschitz_certificate(params.pop("p"), params.pop("n"))
        if theorem_id.startswith("higher_order_"):
            setting = theorem_id[len("higher_order_"):]
            scale = params.pop("sigma") if setting == "rn" else params.pop("n")
            return higher_order_certificate(setting, params.pop("p"), params.pop("d"), scale, params.pop("norms"))
        if theorem_id == "hanson_wright_lsq":
            return hanson_wright_certificate(params.pop("p"), params.pop("sigma"), params.pop("A_hs_q"),
                                             params.pop("A_op_q"), **params)
        if theorem_id == "symmetric_fn":
            return symmetric_fn_certificate(params.pop("B"), params.pop("B_star"), params.pop("gamma"), **params)
    except KeyError as exc:
        raise ConfigurationError(f"certificate {theorem_id!r} is missing parameter {exc.args[0]!r}") from None
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for certificate {theorem_id!r}: {exc}") from None
    raise ConfigurationError(f"unknown theorem id {theorem_id!r}; choose from {THEOREM_IDS}")
