"""Tangent spaces, intrinsic gradients and sectional curvature of l_p spheres."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError
from .sampling import lp_norm, signed_power


def _check_point(theta: np.ndarray, p: float, tol: float = 1e-10) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if not np.isfinite(p) or p < 2:
        raise DomainError("p must be a finite real >= 2")
    if not np.any(theta):
        raise DomainError("theta must be nonzero")
    if abs(lp_norm(theta, p) - 1.0) > tol:
        raise DomainError("theta must lie on the unit l_p sphere")
    return theta


def dual_point(theta: np.ndarray, p: float) -> np.ndarray:
    """theta' = sign(theta) |theta|^(p-1), the normal direction with |theta'|_q = 1."""
    return signed_power(np.asarray(theta, dtype=float), p - 1.0)


@dataclass(frozen=True)
class TangentFrame:
    """A sphere point together with its normal vector theta'."""

    p: float
    theta: np.ndarray
    theta_prime: np.ndarray

    @classmethod
    def at(cls, theta: np.ndarray, p: float) -> "TangentFrame":
        theta = _check_point(theta, p)
        return cls(float(p), theta, dual_point(theta, p))

    @property
    def unit_normal(self) -> np.ndarray:
        return self.theta_prime / np.linalg.norm(self.theta_prime)

    def project(self, y: np.ndarray) -> np.ndarray:
        u = self.unit_normal
        y = np.asarray(y, dtype=float)
        return y - np.dot(y, u) * u


def tangent_project(theta: np.ndarray, y: np.ndarray, p: float) -> np.ndarray:
    """Orthogonal projection of y onto the tangent space {x : <x, theta'> = 0}."""
    return TangentFrame.at(theta, p).project(y)


def intrinsic_gradient(grad: Callable[[np.ndarray], np.ndarray], theta: np.ndarray, p: float) -> np.ndarray:
    """Intrinsic gradient: the tangential projection of the ambient gradient ``grad(theta)``."""
    frame = TangentFrame.at(theta, p)
    return frame.project(grad(frame.theta))


def normalized_extension_gradient(grad: Callable[[np.ndarray], np.ndarray], theta: np.ndarray,
                                  p: float) -> np.ndarray:
    """Gradient at theta of u(x) = f(x / |x|_p), from the intrinsic gradient.

    Uses grad u(theta) = g - <g, theta> theta' with g the intrinsic gradient.
    """
    frame = TangentFrame.at(theta, p)
    g = frame.project(grad(frame.theta))
    return g - np.dot(g, frame.theta) * frame.theta_prime


def normalized_extension_check(f: Callable[[np.ndarray], float], grad: Callable[[np.ndarray], np.ndarray],
                               theta: np.ndarray, p: float, h: float = 1e-6) -> float:
    """Max abs difference between :func:`normalized_extension_gradient` and central differences of u."""
    theta = _check_point(theta, p)

    def u(x):
        return f(x / lp_norm(x, p))

    n = theta.size
    fd = np.empty(n)
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        fd[k] = (u(theta + e) - u(theta - e)) / (2 * h)
    return float(np.max(np.abs(fd - normalized_extension_gradient(grad, theta, p))))


# --------------------------------------------------------------------------
# curvature
# --------------------------------------------------------------------------

def sectional_curvature(x: np.ndarray, i: int, j: int, p: float) -> float:
    """Sectional curvature of the l_p sphere in the plane of the chart vectors X_i, X_j.

    The chart expresses the last coordinate through the others, so ``x`` must
    have nonnegative entries with x[-1] > 0 and ``i``, ``j`` are distinct
    0-based indices below n-1.  With r = p - 1,

        K = (p-1)^2 (x_i x_j x_n)^(p-2) (x_i^p + x_j^p + x_n^p)
            / ((x_i^(2r) + x_j^(2r) + x_n^(2r)) sum_k x_k^(2r)).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 3:
        raise DomainError("curvature needs n >= 3")
    if np.any(x < 0):
        raise DomainError("the chart requires nonnegative coordinates")
    if not x[-1] > 0:
        raise DomainError("the chart requires x_n > 0")
    if not (0 <= i < n - 1 and 0 <= j < n - 1) or i == j:
        raise DomainError("i and j must be distinct indices below n-1")
    if abs(lp_norm(x, p) - 1.0) > 1e-10:
        raise DomainError("x must lie on the unit l_p sphere")
    r = p - 1.0
    xi, xj, xn = x[i], x[j], x[-1]
    num = (p - 1.0) ** 2 * (xi * xj * xn) ** (p - 2.0) * (xi**p + xj**p + xn**p)
    den = (xi ** (2 * r) + xj ** (2 * r) + xn ** (2 * r)) * np.sum(x ** (2 * r))
    return float(num / den)


def symmetric_point(n: int, p: float) -> np.ndarray:
    """(n^(-1/p), ..., n^(-1/p)), where K = (p-1)^2 n^(-(p-2)/p)."""
    return np.full(n, float(n) ** (-1.0 / p))


def epsilon_path_point(n: int, p: float, eps: float, i: int = 0) -> np.ndarray:
    """Sphere point with x_i = eps and the remaining coordinates equal and positive."""
    rest = ((1.0 - eps**p) / (n - 1)) ** (1.0 / p)
    x = np.full(n, rest)
    x[i] = eps
    return x


@dataclass(frozen=True)
class RicciReport:
    p: float
    n: int
    eps: np.ndarray
    curvature: np.ndarray
    fitted_exponent: float
    expected_exponent: float
    interior_curvature: float
    vanishes: bool

    def as_dict(self) -> dict:
        return {
            "p": self.p, "n": self.n,
            "eps": [float(e) for e in self.eps],
            "curvature": [float(k) for k in self.curvature],
            "fitted_exponent": self.fitted_exponent,
            "expected_exponent": self.expected_exponent,
            "interior_curvature": self.interior_curvature,
            "vanishes": self.vanishes,
        }


def ricci_vanishing_check(p: float, n: int, eps: Optional[Sequence[float]] = None,
                          tol: float = 0.05) -> RicciReport:
    """Curvature along x_1 = eps -> 0 and at the symmetric interior point.

    For p > 2 the sectional curvature decays like eps^(p-2), so the Ricci
    lower bound is 0; the fitted log-log slope is compared with p - 2.  For
    p = 2 the curvature stays at 1 and ``vanishes`` is False.
    """
    if n < 3:
        raise DomainError("the check needs n >= 3")
    eps = np.logspace(-4, -1, 13) if eps is None else np.asarray(eps, dtype=float)
    K = np.array([sectional_curvature(epsilon_path_point(n, p, e), 0, 1, p) for e in eps])
    interior = sectional_curvature(symmetric_point(n, p), 0, 1, p)
    if np.all(K > 0):
        slope = float(np.polyfit(np.log(eps), np.log(K), 1)[0])
    else:
        slope = float("inf")
    expected = p - 2.0
    vanishes = bool(p > 2 and abs(slope - expected) <= tol and interior > 0)
    return RicciReport(float(p), int(n), eps, K, slope, expected, interior, vanishes)
