"""Resolvents, Stieltjes transforms and finite-difference checks of resolvent calculus."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

DEFAULT_FD_STEP = 1e-5


def _check_z(z: complex) -> complex:
    z = complex(z)
    if z.imag == 0:
        raise DomainError("spectral parameter must have nonzero imaginary part")
    return z


def _check_symmetric(M: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError("expected a square matrix")
    if np.max(np.abs(M - M.T), initial=0.0) > tol * max(1.0, np.max(np.abs(M), initial=0.0)):
        raise DomainError("matrix is not symmetric")
    return M


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors (as columns) of a symmetric matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def reconstruct(self) -> np.ndarray:
        E = self.eigenvectors
        return (E * self.eigenvalues) @ E.T

    def resolvent(self, z: complex) -> np.ndarray:
        z = _check_z(z)
        E = self.eigenvectors
        return (E * (1.0 / (self.eigenvalues - z))) @ E.T

    def stieltjes(self, z) -> np.ndarray | complex:
        z = np.asarray(z, dtype=complex)
        if np.any(z.imag == 0):
            raise DomainError("spectral parameter must have nonzero imaginary part")
        s = np.mean(1.0 / (self.eigenvalues[:, None] - z.reshape(1, -1)), axis=0)
        return complex(s[0]) if z.ndim == 0 else s.reshape(z.shape)


def eigen_symmetric(M: np.ndarray) -> EigenDecomposition:
    M = _check_symmetric(M)
    w, E = np.linalg.eigh(M)
    return EigenDecomposition(w, E)


def resolvent(M, z: complex) -> np.ndarray:
    """R(z) = (M - z I)^-1, via the spectral decomposition.

    ``M`` may be a symmetric matrix or a precomputed :class:`EigenDecomposition`
    (the cheap path when scanning many z).
    """
    dec = M if isinstance(M, EigenDecomposition) else eigen_symmetric(M)
    return dec.resolvent(z)


def resolvent_direct(M: np.ndarray, z: complex) -> np.ndarray:
    """(M - z I)^-1 by a dense complex solve; independent of :func:`resolvent`."""
    z = _check_z(z)
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    return np.linalg.solve(M - z * np.eye(n), np.eye(n, dtype=complex))


def stieltjes_empirical(M, z):
    """(1/n) tr (M - zI)^-1 = (1/n) sum_k 1/(lambda_k - z)."""
    if isinstance(M, EigenDecomposition):
        return M.stieltjes(z)
    M = _check_symmetric(M)
    return EigenDecomposition(np.linalg.eigvalsh(M), np.empty((0, 0))).stieltjes(z)


def semicircle_stieltjes(z):
    """Stieltjes transform of the semicircle law on [-2, 2].

    Solves s^2 + z s + 1 = 0, keeping the root whose imaginary part has the
    sign of Im z.  Works elementwise on arrays.
    """
    z_arr = np.asarray(z, dtype=complex)
    if np.any(z_arr.imag == 0):
        raise DomainError("spectral parameter must have nonzero imaginary part")
    root = np.sqrt(z_arr * z_arr - 4.0)
    s_plus = 0.5 * (-z_arr + root)
    s_minus = 0.5 * (-z_arr - root)
    pick_plus = np.sign(s_plus.imag) == np.sign(z_arr.imag)
    # near-equal imaginary parts: prefer the root of smaller modulus, which is the transform
    tie = np.abs(s_plus.imag - s_minus.imag) < 1e-300
    pick_plus = np.where(tie, np.abs(s_plus) <= np.abs(s_minus), pick_plus)
    s = np.where(pick_plus, s_plus, s_minus)
    return complex(s) if np.ndim(z) == 0 else s


def semicircle_residual(z, s=None):
    """|s^2 + z s + 1| for the semicircle transform (or a supplied s)."""
    if s is None:
        s = semicircle_stieltjes(z)
    return np.abs(np.asarray(s) ** 2 + np.asarray(z) * np.asarray(s) + 1.0)


# --------------------------------------------------------------------------
# derivative checks
# --------------------------------------------------------------------------

def _rel_err(numeric: np.ndarray, analytic: np.ndarray) -> float:
    """max |numeric - analytic| / max |analytic| (entrywise maxima)."""
    scale = np.max(np.abs(analytic), initial=0.0)
    diff = np.max(np.abs(np.asarray(numeric) - np.asarray(analytic)), initial=0.0)
    if scale == 0.0:
        return float(diff)
    return float(diff / scale)


def _entry_direction(n: int, i: int, j: int) -> np.ndarray:
    """Symmetric perturbation direction of the entry pair (i, j)."""
    D = np.zeros((n, n))
    D[i, j] += 1.0
    D[j, i] += 1.0
    if i == j:
        D *= 0.5
    return D


def resolvent_entry_derivative(R: np.ndarray, i: int, j: int) -> np.ndarray:
    """dR/dM_ij = -R (E_ij + E_ji) R (1 - 1{i=j}/2) for symmetric M."""
    n = R.shape[0]
    return -R @ _entry_direction(n, i, j) @ R


def trace_entry_derivative(R: np.ndarray, i: int, j: int) -> complex:
    """d tr R / dM_ij = -(R^2)_ij (1 + 1{i != j})."""
    R2_ij = R[i, :] @ R[:, j]
    return -R2_ij * (1.0 if i == j else 2.0)


def resolvent_derivative_check(M: np.ndarray, i: int, j: int, z: complex,
                               h: float = DEFAULT_FD_STEP) -> float:
    """Largest relative error of the entry-derivative formulas against central differences.

    Both the matrix derivative of R and the derivative of tr R are compared;
    relative error is the max-abs difference over the max-abs analytic value.
    """
    if not 1e-7 <= h <= 1e-3:
        raise DomainError("finite-difference step must lie in [1e-7, 1e-3]")
    M = _check_symmetric(M)
    z = _check_z(z)
    n = M.shape[0]
    D = _entry_direction(n, i, j)
    R = resolvent_direct(M, z)
    R_plus = resolvent_direct(M + h * D, z)
    R_minus = resolvent_direct(M - h * D, z)
    fd_R = (R_plus - R_minus) / (2 * h)
    fd_tr = (np.trace(R_plus) - np.trace(R_minus)) / (2 * h)
    err_R = _rel_err(fd_R, resolvent_entry_derivative(R, i, j))
    err_tr = _rel_err(fd_tr, trace_entry_derivative(R, i, j))
    return max(err_R, err_tr)


class MatrixPath:
    """A differentiable matrix-valued path t -> M(t) with its analytic derivative."""

    def __init__(self, value: Callable[[float], np.ndarray],
                 derivative: Optional[Callable[[float], np.ndarray]] = None):
        self.value = value
        self.derivative = derivative

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.value(t))

    @classmethod
    def polynomial(cls, *coeffs: np.ndarray) -> "MatrixPath":
        """M(t) = C0 + t C1 + t^2 C2 + ..."""
        coeffs = [np.asarray(c) for c in coeffs]

        def value(t):
            return sum(c * t**k for k, c in enumerate(coeffs))

        def derivative(t):
            return sum(k * c * t ** (k - 1) for k, c in enumerate(coeffs) if k > 0) + 0 * coeffs[0]

        return cls(value, derivative)

    @classmethod
    def exp_identity(cls, n: int) -> "MatrixPath":
        """M(t) = e^t I."""
        I = np.eye(n)
        return cls(lambda t: np.exp(t) * I, lambda t: np.exp(t) * I)


def matrix_calculus_check(path, t0: float, h: float = DEFAULT_FD_STEP) -> float:
    """Largest relative error of four matrix-calculus identities along a path.

    Checks d(M^-1), d(M^2), d(M^-2) and the chain rule for f(M) = tr(M^-1)
    (gradient -(M^-2)^T) against central differences in t.  ``path`` is a
    :class:`MatrixPath` or a bare callable; for a bare callable dM/dt is itself
    taken by central differences.
    """
    if not isinstance(path, MatrixPath):
        path = MatrixPath(path)
    M = np.asarray(path(t0))
    if np.linalg.cond(M) > 1e12:
        raise DomainError("matrix is numerically singular at t0")
    if path.derivative is not None:
        dM = np.asarray(path.derivative(t0))
    else:
        dM = (np.asarray(path(t0 + h)) - np.asarray(path(t0 - h))) / (2 * h)

    def central(fn):
        return (fn(np.asarray(path(t0 + h))) - fn(np.asarray(path(t0 - h)))) / (2 * h)

    inv = np.linalg.inv
    Minv = inv(M)
    Minv2 = Minv @ Minv
    errors = [
        _rel_err(central(inv), -Minv @ dM @ Minv),
        _rel_err(central(lambda A: A @ A), dM @ M + M @ dM),
        _rel_err(central(lambda A: np.linalg.matrix_power(inv(A), 2)),
                 -Minv @ dM @ Minv2 - Minv2 @ dM @ Minv),
        _rel_err(central(lambda A: np.trace(inv(A))), np.sum(-Minv2.T * dM)),
    ]
    return max(errors)
