"""Gamma-function moment formulas on l_p spheres and moment-to-tail conversions.

Every Gamma ratio is evaluated through ``scipy.special.gammaln`` so that
arguments such as n/p > 170 do not overflow.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import DomainError


def _check_pnv(p: float, n: int, v: float) -> None:
    if not np.isfinite(p) or p < 2:
        raise DomainError("p must be a finite real >= 2")
    if n < 1:
        raise DomainError("n must be at least 1")
    if v < 0:
        raise DomainError("moment order v must be nonnegative")


def exact_moment_cone(p: float, n: int, v: float) -> float:
    """E|theta_1|^v under the cone measure on the unit l_p sphere of R^n.

    Equals Gamma((1+v)/p)/Gamma(1/p) * Gamma(n/p)/Gamma((v+n)/p).
    """
    _check_pnv(p, n, v)
    log_val = (gammaln((1.0 + v) / p) - gammaln(1.0 / p)
               + gammaln(n / p) - gammaln((v + n) / p))
    return float(np.exp(log_val))


def exact_signed_moment_cone(p: float, n: int, v: int) -> float:
    """E theta_1^v for integer v: zero for odd v by symmetry."""
    if int(v) != v:
        raise DomainError("signed moments need an integer order")
    return 0.0 if int(v) % 2 else exact_moment_cone(p, n, v)


def cone_moment_bound(p: float, n: int, v: float) -> float:
    """Piecewise upper bound on :func:`exact_moment_cone`.

    n^-1 (n+v)^(1-v/p)                 for 0 <= v <= p,
    (p+1)^(v/p-1) n^(-v/p)             for p <= v <= 2p,
    (1+v)^(v/p-1) n^-1 (n+p)^(1-v/p)   for v >= 2p.
    """
    _check_pnv(p, n, v)
    if v <= p:
        return float((n + v) ** (1.0 - v / p) / n)
    if v <= 2 * p:
        return float((p + 1.0) ** (v / p - 1.0) * n ** (-v / p))
    return float((1.0 + v) ** (v / p - 1.0) * (n + p) ** (1.0 - v / p) / n)


class ConeMoment(NamedTuple):
    value: float
    bound: float


def cone_moment(p: float, n: int, v: float) -> ConeMoment:
    """Exact absolute moment together with its piecewise bound."""
    return ConeMoment(exact_moment_cone(p, n, v), cone_moment_bound(p, n, v))


def second_moment_cone(p: float, n: int) -> float:
    """m_2 = Gamma(3/p) Gamma(n/p) / (Gamma((n+2)/p) Gamma(1/p))."""
    return exact_moment_cone(p, n, 2.0)


def exact_neg_moment_pgauss(p: float, n: int, v: float) -> float:
    """E|Z|_p^-v for Z with i.i.d. p-generalized Gaussian coordinates.

    Equals Gamma((n-v)/p) / (p^(v/p) Gamma(n/p)); finite only for n > v.
    """
    _check_pnv(p, n, v)
    if not n > v:
        raise DomainError("negative moment E|Z|_p^-v needs n > v")
    return float(np.exp(gammaln((n - v) / p) - (v / p) * np.log(p) - gammaln(n / p)))


def neg_moment_bound(p: float, n: int, v: float) -> float:
    """(n-v)^-1 n^(1-v/p), valid for 0 <= v <= p."""
    _check_pnv(p, n, v)
    if not n > v:
        raise DomainError("negative moment E|Z|_p^-v needs n > v")
    if v > p:
        raise DomainError("the negative-moment bound holds only for v <= p")
    return float(n ** (1.0 - v / p) / (n - v))


def density_l2_bound(p: float) -> float:
    """(p+1)^(1/2-1/p), bounding the L2(cone) norm of the surface density."""
    if not np.isfinite(p) or p < 2:
        raise DomainError("p must be a finite real >= 2")
    return float((p + 1.0) ** (0.5 - 1.0 / p))


def moment_to_expmoment(gamma: float) -> float:
    """Constant c = 1/(2 gamma e) with E exp(c|g|) <= 2 whenever ||g||_k <= gamma k for all k."""
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    return 1.0 / (2.0 * gamma * np.e)


def expmoment_series(gamma: float, terms: int = 200) -> float:
    """Partial sum of sum_{k>=1} (c gamma)^k k^k / k! at c = 1/(2 gamma e).

    This majorises E exp(c|g|) - 1 in the worst case ||g||_k = gamma k, and the
    proof needs it to stay below 1.
    """
    c = moment_to_expmoment(gamma)
    k = np.arange(1, terms + 1, dtype=float)
    log_terms = k * np.log(c * gamma) + k * np.log(k) - gammaln(k + 1.0)
    return float(np.sum(np.exp(log_terms)))


class MomentTail(NamedTuple):
    bound: float
    """min(1, raw)."""
    raw: float
    trivial: bool
    """True outside the regime (Le)^(-p/l) eta(t) >= q where the proof's estimate is informative."""


def moment_to_tail(C: Sequence[float], p: float, q: float, t: float) -> MomentTail:
    """Tail bound from the moment growth ||g||_r <= sum_k (C_k r)^(k/p).

    Returns 2 exp(-log(2) / (q (L e)^(p/l)) * min_k t^(p/k) / C_k), where the
    minimum runs over k with C_k > 0, L is their number and l the smallest such k.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 1 or C.size == 0 or np.any(C < 0):
        raise DomainError("coefficients must be a nonempty nonnegative sequence")
    active = np.flatnonzero(C > 0)
    if active.size == 0:
        raise DomainError("at least one coefficient must be positive")
    if t < 0:
        raise DomainError("t must be nonnegative")
    k = active + 1.0
    L = active.size
    ell = k[0]
    eta = float(np.min(t ** (p / k) / C[active]))
    scale = (L * np.e) ** (-p / ell)
    raw = float(2.0 * np.exp(-np.log(2.0) * scale * eta / q))
    return MomentTail(min(1.0, raw), raw, bool(scale * eta < q))
