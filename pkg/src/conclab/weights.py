"""Weight matrices induced by rotations and the tail bound on their largest entry."""
from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainError
from .sampling import check_orthogonal


def build_theta(O: np.ndarray, validate: bool = True) -> np.ndarray:
    """Weights Theta_ij = sqrt((O_ij^2 + O_ji^2) / 2) of a rotation O.

    The result is symmetric and its Hadamard square is doubly stochastic.
    """
    O = np.asarray(O, dtype=float)
    if validate:
        check_orthogonal(O)
    return np.sqrt(0.5 * (O**2 + O.T**2))


def hadamard_row_sum_deviation(theta: np.ndarray) -> float:
    """max_i |sum_j theta_ij^2 - 1|."""
    return float(np.max(np.abs(np.sum(theta**2, axis=1) - 1.0)))


def check_weight_matrix(theta: np.ndarray, tol: float = 1e-12) -> None:
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise DomainError("weights must be nonnegative")
    if not np.array_equal(theta, theta.T):
        raise DomainError("weight matrix must be symmetric")
    dev = hadamard_row_sum_deviation(theta)
    if dev > tol:
        raise DomainError(f"Hadamard square is not doubly stochastic (deviation {dev:.3e})")


def max_weight_threshold(n: int, t: float) -> float:
    """Level t * sqrt(log(n) / n) at which the max-entry tail is evaluated."""
    return t * np.sqrt(np.log(n) / n)


class MaxWeightTail(NamedTuple):
    bound: float
    """min(1, 8 / (t sqrt(2 pi)) * n^(2 - t^2/8))."""
    raw: float
    simplified: Optional[float]
    """8 / (t sqrt(2 pi)) * n^-3, reported only for t >= sqrt(40)."""


def max_weight_tail_certificate(n: int, t: float) -> MaxWeightTail:
    """Upper bound on P(max_ij Theta_ij >= t sqrt(log n / n)) under Haar measure."""
    if n < 4:
        raise DomainError("the max-weight tail bound needs n >= 4")
    if t < 0:
        raise DomainError("t must be nonnegative")
    if t == 0:
        return MaxWeightTail(1.0, np.inf, None)
    log_pref = np.log(8.0) - np.log(t) - 0.5 * np.log(2.0 * np.pi)
    raw = float(np.exp(log_pref + (2.0 - t * t / 8.0) * np.log(n)))
    simplified = float(np.exp(log_pref - 3.0 * np.log(n))) if t * t >= 40.0 else None
    return MaxWeightTail(min(1.0, raw), raw, simplified)
