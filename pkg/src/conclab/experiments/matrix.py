"""Monte Carlo experiments on weighted random matrices Theta(O) o X."""
from __future__ import annotations

import warnings
from typing import Optional, Sequence

import numpy as np

from ..certificates import cert_local_law_rate, sudakov_certificate
from ..errors import DomainError
from ..sampling import (EntryDistribution, RngState, gaussian_entries, sample_entry_matrix,
                        sample_haar_so)
from ..spectral import semicircle_stieltjes
from ..weights import build_theta, hadamard_row_sum_deviation, max_weight_tail_certificate, max_weight_threshold
from .results import LocalLawResult, TailExperimentResult, parallel_map, tail_result

# stream tags keep the experiments' random streams disjoint
_TAG_LOCAL_LAW = 1
_TAG_SUDAKOV = 2
_TAG_POINTWISE = 3
_TAG_MAX_WEIGHT = 4


def weighted_stieltjes(theta: np.ndarray, X: np.ndarray, z: complex) -> complex:
    """(1/n) tr((Theta o X - z I)^-1) from the eigenvalues of the weighted matrix."""
    lam = np.linalg.eigvalsh(theta * X)
    return complex(np.mean(1.0 / (lam - z)))


def _replica_mean_s(theta: np.ndarray, dist: EntryDistribution, z: complex, inner: int,
                    rng: RngState) -> complex:
    n = theta.shape[0]
    s = np.array([weighted_stieltjes(theta, sample_entry_matrix(dist, n, rng.child(k)), z)
                  for k in range(inner)])
    return complex(np.mean(s))


def _check_z(z: complex) -> complex:
    z = complex(z)
    if z.imag == 0:
        raise DomainError("z must have nonzero imaginary part")
    return z


def run_local_law(n_list: Sequence[int] = (50, 100, 200, 400), z: complex = 0.2 + 0.5j,
                  dist: Optional[EntryDistribution] = None, outer_replicas: int = 200,
                  rng: RngState = RngState(0), inner_replicas: int = 16,
                  threads: Optional[int] = None) -> LocalLawResult:
    """Mean Stieltjes transform of Theta(O) o X against the semicircle law.

    Each outer replica draws one rotation O and averages s_Theta(z) over
    ``inner_replicas`` entry matrices X, so the estimate targets E_X E_SO(n).
    The deviation |mean - s(z)| should fall like log(n)/sqrt(n); the slope of
    log(deviation) against log(n) is fitted by least squares.
    """
    z = _check_z(z)
    if abs(z.imag) > 1:
        warnings.warn("|Im z| > 1 lies outside the local-law hypothesis", stacklevel=2)
    if outer_replicas < 100:
        raise DomainError("the local-law experiment needs at least 100 outer replicas")
    if inner_replicas < 1:
        raise DomainError("inner_replicas must be positive")
    n_list = np.asarray(n_list, dtype=int)
    if np.any(n_list < 4):
        raise DomainError("every n must be >= 4")
    dist = dist or gaussian_entries()
    s_true = semicircle_stieltjes(z)
    means, ses = [], []
    for n in n_list:
        def replica(r, n=int(n)):
            key = RngState(rng.master_seed, r, rng.subkey + (_TAG_LOCAL_LAW, n))
            theta = build_theta(sample_haar_so(n, key.child(0)), validate=False)
            return _replica_mean_s(theta, dist, z, inner_replicas, key.child(1))

        vals = np.array(parallel_map(replica, range(outer_replicas), threads))
        means.append(np.mean(vals))
        ses.append(np.std(vals, ddof=1) / np.sqrt(vals.size))
    means = np.array(means)
    dev = np.abs(means - s_true)
    slope = float(np.polyfit(np.log(n_list), np.log(dev), 1)[0]) if n_list.size > 1 else float("nan")
    rate = cert_local_law_rate(n_list, min(abs(z.imag), 1.0), dist.m3)
    return LocalLawResult(n_list, z, means, np.array(ses), dev, s_true, slope, np.atleast_1d(rate),
                          outer_replicas, inner_replicas, rng.master_seed, dist.label)


def run_sudakov_tails(n: int = 50, z: complex = 1j, dist: Optional[EntryDistribution] = None,
                      outer: int = 300, inner: int = 100, t_grid: Optional[Sequence[float]] = None,
                      rng: RngState = RngState(0), threads: Optional[int] = None) -> TailExperimentResult:
    """Fluctuation of E_X s_Theta(z) over random weights.

    Outer replicas draw O; inner replicas estimate E_X s_Theta(z) for that O.
    The tail of |E_X s_Theta - grand mean| is compared with
    2 exp(-|v|^4 n^2 t^2 / 768).  The inner Monte Carlo error is reported as
    ``inner_noise`` so it can be compared with the t grid.
    """
    z = _check_z(z)
    if n < 3:
        raise DomainError("n must be >= 3")
    if inner < 50 or outer < 200:
        raise DomainError("the nested experiment needs inner >= 50 and outer >= 200")
    dist = dist or gaussian_entries()

    def replica(r):
        key = RngState(rng.master_seed, r, rng.subkey + (_TAG_SUDAKOV, n))
        theta = build_theta(sample_haar_so(n, key.child(0)), validate=False)
        s = np.array([weighted_stieltjes(theta, sample_entry_matrix(dist, n, key.child(1, k)), z)
                      for k in range(inner)])
        return np.mean(s), np.std(s, ddof=1) / np.sqrt(inner)

    out = parallel_map(replica, range(outer), threads)
    means = np.array([m for m, _ in out])
    inner_se = np.array([s for _, s in out])
    stat = np.abs(means - np.mean(means))
    cert = sudakov_certificate(n, z.imag, "theta")
    if t_grid is None:
        t_grid = np.linspace(0.0, 4.0 * np.sqrt(768.0) / (abs(z.imag) ** 2 * n), 41)
    return tail_result("sudakov_theta", stat, t_grid, cert, n=n, p=2.0, seed=rng.master_seed,
                       params={"z": z, "inner": inner, "outer": outer, "distribution": dist.label},
                       diagnostics={"inner_noise": float(np.mean(inner_se)),
                                    "max_deviation": float(np.max(stat))})


def run_sudakov_pointwise(n: int = 100, z: complex = 1j, replicas: int = 1000,
                          t_grid: Optional[Sequence[float]] = None, rng: RngState = RngState(0),
                          threads: Optional[int] = None) -> TailExperimentResult:
    """Fluctuation of s_Theta(z) over Gaussian X for one fixed rotation O.

    Compared with 2 exp(-|v|^4 n t^2 / (4 r^2 max Theta^2)) with r^2 = 2, the
    concentration constant of the standard Gaussian vector, and the observed
    largest weight.
    """
    z = _check_z(z)
    dist = gaussian_entries()
    base = RngState(rng.master_seed, 0, rng.subkey + (_TAG_POINTWISE, n))
    theta = build_theta(sample_haar_so(n, base.child(0)), validate=False)
    max_theta = float(np.max(theta))

    def replica(r):
        key = RngState(rng.master_seed, r, rng.subkey + (_TAG_POINTWISE, n, 1))
        return weighted_stieltjes(theta, sample_entry_matrix(dist, n, key), z)

    s = np.array(parallel_map(replica, range(replicas), threads))
    stat = np.abs(s - np.mean(s))
    r = np.sqrt(dist.subgaussian_r2)
    cert = sudakov_certificate(n, z.imag, "x_pointwise", r=r, max_theta=max_theta)
    if t_grid is None:
        t_grid = np.linspace(0.0, 4.0 * 2.0 * r * max_theta / (abs(z.imag) ** 2 * np.sqrt(n)), 41)
    return tail_result("sudakov_x_pointwise", stat, t_grid, cert, n=n, p=2.0, seed=rng.master_seed,
                       params={"z": z, "distribution": dist.label, "r2": dist.subgaussian_r2},
                       diagnostics={"max_theta": max_theta, "max_deviation": float(np.max(stat))})


def run_max_weight_tails(n: int, replicas: int = 10_000, t_grid: Sequence[float] = (4, 5, 6, 7),
                         rng: RngState = RngState(0)) -> TailExperimentResult:
    """Frequency of max Theta_ij >= t sqrt(log n / n) under Haar measure against its bound.

    Also records the worst Hadamard-square row-sum deviation over all draws
    and the mean of max Theta_ij / sqrt(log n / n).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    maxima = np.empty(replicas)
    worst = 0.0
    for r in range(replicas):
        key = RngState(rng.master_seed, r, rng.subkey + (_TAG_MAX_WEIGHT, n))
        theta = build_theta(sample_haar_so(n, key), validate=False)
        worst = max(worst, hadamard_row_sum_deviation(theta))
        maxima[r] = np.max(theta)
    scale = np.sqrt(np.log(n) / n)
    stat = maxima / scale
    tail = np.array([np.mean(maxima >= max_weight_threshold(n, t)) for t in t_grid])
    bound = np.array([max_weight_tail_certificate(n, t).bound for t in t_grid])
    se = np.sqrt(tail * (1 - tail) / replicas)
    return TailExperimentResult("max_weight", t_grid, tail, se, bound, n, 2.0, replicas, rng.master_seed,
                                theorem_id="", params={},
                                constants={},
                                diagnostics={"row_sum_deviation": worst,
                                             "mean_scaled_max": float(np.mean(stat)),
                                             "extra_pass": worst <= 1e-12})
