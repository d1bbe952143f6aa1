"""Deterministic verification suites for moments, resolvent identities, the semicircle and curvature."""
from __future__ import annotations

from typing import Dict, List, Sequence

import numpy as np

from ..exact_moments import cone_moment_bound, exact_moment_cone
from ..geometry import ricci_vanishing_check, sectional_curvature, symmetric_point
from ..sampling import RngState, as_generator, sample_cone_blocks
from ..spectral import (MatrixPath, eigen_symmetric, matrix_calculus_check, resolvent,
                        resolvent_derivative_check, resolvent_direct, semicircle_residual,
                        semicircle_stieltjes, stieltjes_empirical)

_TAG_MOMENTS = 31
_TAG_RESOLVENT = 32
_TAG_CURVATURE = 33


def run_moment_check(p_list: Sequence[float] = (2, 3, 4), n_list: Sequence[int] = (5, 10),
                     v_list: Sequence[float] = (1, 2, 3, 4), replicas: int = 100_000,
                     rng: RngState = RngState(0)) -> List[Dict[str, float]]:
    """Monte Carlo |theta_1|^v and theta_1^v (odd v) against the Gamma formula, one row per (p, n, v)."""
    rows = []
    for p in p_list:
        for n in n_list:
            theta1 = sample_cone_blocks(p, n, replicas, rng.child(_TAG_MOMENTS, n, int(round(10 * p))))[:, 0]
            for v in v_list:
                a = np.abs(theta1) ** v
                mc, se = float(np.mean(a)), float(np.std(a, ddof=1) / np.sqrt(replicas))
                exact = exact_moment_cone(p, n, v)
                row = {"p": float(p), "n": int(n), "v": float(v), "mc": mc, "stderr": se, "exact": exact,
                       "bound": cone_moment_bound(p, n, v), "ok": abs(mc - exact) <= 3 * se}
                row["bound_ok"] = exact <= row["bound"] * (1 + 1e-12)
                if float(v).is_integer() and int(v) % 2 == 1:
                    s = theta1 ** int(v)
                    row["odd_mc"] = float(np.mean(s))
                    row["odd_stderr"] = float(np.std(s, ddof=1) / np.sqrt(replicas))
                    row["odd_ok"] = abs(row["odd_mc"]) <= 3 * row["odd_stderr"]
                rows.append(row)
    return rows


def _random_symmetric(gen: np.random.Generator, n: int) -> np.ndarray:
    G = gen.standard_normal((n, n))
    return (G + G.T) / np.sqrt(2.0 * n)


def run_resolvent_suite(pairs: int = 100, n: int = 20, rng: RngState = RngState(0)) -> Dict[str, float]:
    """Largest errors of the resolvent identities over random (M, z).

    Keys: ``bound_excess`` (max |R_ij| - 1/|v|, should be <= 0), ``row_sum``
    and ``row_sum_abs`` (the two row-sum identities), ``inverse`` ((M - z)R - I),
    ``two_method`` (Stieltjes via eigenvalues vs direct inverse),
    ``derivative`` (entry derivatives, relative) and ``matrix_calculus``.
    """
    gen = as_generator(rng.child(_TAG_RESOLVENT))
    out = dict.fromkeys(("bound_excess", "row_sum", "row_sum_abs", "inverse", "two_method",
                         "derivative", "matrix_calculus"), 0.0)
    out["bound_excess"] = -np.inf
    vs = (0.1, 0.5, 1.0)
    for k in range(pairs):
        M = _random_symmetric(gen, n)
        v = vs[k % 3] * (1 if k % 2 == 0 else -1)
        z = complex(gen.uniform(-2.5, 2.5), v)
        dec = eigen_symmetric(M)
        R = resolvent(dec, z)
        Rbar = resolvent(dec, z.conjugate())
        out["bound_excess"] = max(out["bound_excess"], float(np.max(np.abs(R)) - 1.0 / abs(v)))
        i = k % n
        out["row_sum"] = max(out["row_sum"], abs(np.sum(R[:, i] ** 2) - (R @ R)[i, i]))
        out["row_sum_abs"] = max(out["row_sum_abs"], abs(np.sum(np.abs(R[:, i]) ** 2) - (R @ Rbar)[i, i]))
        out["inverse"] = max(out["inverse"], float(np.max(np.abs((M - z * np.eye(n)) @ R - np.eye(n)))))
        direct = np.trace(resolvent_direct(M, z)) / n
        out["two_method"] = max(out["two_method"], abs(stieltjes_empirical(dec, z) - direct))
        if k < 20:
            a, b = int(gen.integers(0, n)), int(gen.integers(0, n))
            out["derivative"] = max(out["derivative"], resolvent_derivative_check(M, a, b, z))
            B, C = _random_symmetric(gen, n), _random_symmetric(gen, n)
            path = MatrixPath.polynomial(M + 3.0 * np.eye(n), B, C)
            out["matrix_calculus"] = max(out["matrix_calculus"], matrix_calculus_check(path, 0.1))
    return {k: float(v) for k, v in out.items()}


def semicircle_grid(points: int = 100) -> np.ndarray:
    """10 x 10 grid with Re z in [-3, 3] and Im z in [0.05, 2]."""
    side = int(round(np.sqrt(points)))
    re, im = np.meshgrid(np.linspace(-3, 3, side), np.linspace(0.05, 2, side))
    return (re + 1j * im).ravel()


def run_semicircle_check(points: int = 100) -> Dict[str, float]:
    z = semicircle_grid(points)
    s = semicircle_stieltjes(z)
    s_i = semicircle_stieltjes(1j)
    return {"max_residual": float(np.max(semicircle_residual(z, s))),
            "min_imag": float(np.min(s.imag)),
            "s_i_error": abs(s_i - 1j * (np.sqrt(5.0) - 1.0) / 2.0),
            "s_2i_error": abs(semicircle_stieltjes(2j) - 1j * (np.sqrt(2.0) - 1.0))}


def run_curvature_check(trials: int = 100, rng: RngState = RngState(0)) -> Dict[str, float]:
    """Round-sphere curvature, symmetric-point formula and eps-path exponents."""
    gen = as_generator(rng.child(_TAG_CURVATURE))
    round_err = 0.0
    for _ in range(trials):
        n = int(gen.integers(3, 12))
        x = np.abs(gen.standard_normal(n)) + 1e-3
        x /= np.linalg.norm(x)
        i, j = gen.choice(n - 1, size=2, replace=False)
        round_err = max(round_err, abs(sectional_curvature(x, int(i), int(j), 2.0) - 1.0))
    sym_err = 0.0
    for p in (2.0, 3.0, 4.0, 5.5):
        for n in (3, 10, 50):
            K = sectional_curvature(symmetric_point(n, p), 0, 1, p)
            sym_err = max(sym_err, abs(K - (p - 1) ** 2 * n ** (-(p - 2) / p)))
    out = {"round_error": round_err, "symmetric_error": sym_err}
    for p in (3.0, 4.0):
        rep = ricci_vanishing_check(p, 4)
        out[f"exponent_p{int(p)}"] = rep.fitted_exponent
        out[f"exponent_error_p{int(p)}"] = abs(rep.fitted_exponent - (p - 2))
    return out
