"""Seeded random generation for every stochastic object in the package.

All samplers take an explicit :class:`RngState` (or an already constructed
``numpy.random.Generator``) and never touch global random state.  Streams are
derived from ``(master_seed, stream_id)`` through ``numpy.random.SeedSequence``
spawn keys feeding a Philox counter-based bit generator, so replica ``k`` of an
experiment draws the same numbers no matter which worker runs it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple, Union

import numpy as np

from .errors import ConfigurationError, DomainError

BLOCK_SIZE = 8192
"""Number of vector replicas drawn from one stream by the batched samplers."""


@dataclass(frozen=True)
class RngState:
    """Address of one random stream.

    ``subkey`` extends the spawn key for nested experiments (e.g. the inner
    loop of a replica); two states with different keys give independent
    streams.
    """

    master_seed: int
    stream_id: int = 0
    subkey: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        for value in (self.master_seed, self.stream_id, *self.subkey):
            if not 0 <= int(value) < 2**64:
                raise ConfigurationError("seeds and stream ids must be unsigned 64-bit integers")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.master_seed),
                                     spawn_key=(int(self.stream_id),) + tuple(int(k) for k in self.subkey))
        return np.random.Generator(np.random.Philox(seq))

    def stream(self, stream_id: int) -> "RngState":
        return RngState(self.master_seed, stream_id, self.subkey)

    def child(self, *keys: int) -> "RngState":
        return RngState(self.master_seed, self.stream_id, self.subkey + tuple(keys))


RngLike = Union[RngState, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngState):
        return rng.generator()
    raise ConfigurationError(f"expected RngState or numpy Generator, got {type(rng).__name__}")


# --------------------------------------------------------------------------
# entry distributions
# --------------------------------------------------------------------------

ENTRY_KINDS = ("standard_gaussian", "rademacher", "centered_custom")


@dataclass(frozen=True)
class EntryDistribution:
    """Law of the i.i.d. matrix entries: mean 0, variance 1.

    ``m3`` is the third absolute moment and ``bound_K`` an almost-sure bound
    when one exists.  A ``centered_custom`` law needs ``draw(gen, size)``.
    """

    kind: str
    m3: float
    bound_K: Optional[float] = None
    draw: Optional[Callable[[np.random.Generator, tuple], np.ndarray]] = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        if self.kind not in ENTRY_KINDS:
            raise ConfigurationError(f"unknown entry distribution kind {self.kind!r}")
        if self.kind == "centered_custom" and self.draw is None:
            raise ConfigurationError("centered_custom entries need a draw(gen, size) callable")
        if not np.isfinite(self.m3) or self.m3 < 0:
            raise ConfigurationError("m3 must be finite and nonnegative")

    @property
    def label(self) -> str:
        return self.name or self.kind

    @property
    def subgaussian_r2(self) -> Optional[float]:
        """Squared sub-Gaussian concentration constant r^2 of the entry vector, if known."""
        if self.kind == "standard_gaussian":
            return 2.0
        return None

    def sample(self, gen: np.random.Generator, size) -> np.ndarray:
        if self.kind == "standard_gaussian":
            return gen.standard_normal(size)
        if self.kind == "rademacher":
            return 2.0 * gen.integers(0, 2, size=size) - 1.0
        return np.asarray(self.draw(gen, size), dtype=float)


def gaussian_entries() -> EntryDistribution:
    return EntryDistribution("standard_gaussian", m3=2.0 * np.sqrt(2.0 / np.pi), name="gaussian")


def rademacher_entries() -> EntryDistribution:
    return EntryDistribution("rademacher", m3=1.0, bound_K=1.0, name="rademacher")


def uniform_entries() -> EntryDistribution:
    """Uniform law on [-sqrt(3), sqrt(3)], the bounded custom example."""
    a = np.sqrt(3.0)
    return EntryDistribution("centered_custom", m3=a**3 / 4.0, bound_K=a,
                             draw=lambda gen, size: gen.uniform(-a, a, size), name="uniform")


ENTRY_DISTRIBUTIONS = {
    "gaussian": gaussian_entries,
    "rademacher": rademacher_entries,
    "uniform": uniform_entries,
}


def entry_distribution(name: str) -> EntryDistribution:
    try:
        return ENTRY_DISTRIBUTIONS[name]()
    except KeyError:
        raise ConfigurationError(f"unknown entry distribution {name!r}; "
                                 f"choose from {sorted(ENTRY_DISTRIBUTIONS)}") from None


def sample_entry_matrix(dist: EntryDistribution, n: int, rng: RngLike) -> np.ndarray:
    """Symmetric n x n matrix with i.i.d. upper triangle (diagonal included)."""
    if not isinstance(dist, EntryDistribution):
        raise ConfigurationError("dist must be an EntryDistribution")
    if n < 1:
        raise DomainError("n must be at least 1")
    gen = as_generator(rng)
    iu = np.triu_indices(n)
    values = dist.sample(gen, (iu[0].size,))
    X = np.zeros((n, n))
    X[iu] = values
    X.T[iu] = values
    return X


# --------------------------------------------------------------------------
# Haar measure on SO(n)
# --------------------------------------------------------------------------

def sample_haar_so(n: int, rng: RngLike) -> np.ndarray:
    """Haar-distributed rotation via sign-corrected QR of a Gaussian matrix.

    The QR factor with positive triangular diagonal is Haar on O(n); flipping
    the first column when the determinant is -1 pushes the reflection coset
    onto SO(n) without changing the law.
    """
    if n < 2:
        raise DomainError("SO(n) sampling needs n >= 2")
    gen = as_generator(rng)
    Q, R = np.linalg.qr(gen.standard_normal((n, n)))
    Q *= np.where(np.diag(R) < 0, -1.0, 1.0)
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def check_orthogonal(O: np.ndarray, tol: float = 1e-10, det_tol: float = 1e-8) -> None:
    O = np.asarray(O, dtype=float)
    if O.ndim != 2 or O.shape[0] != O.shape[1]:
        raise DomainError("orthogonal matrix must be square")
    err = np.max(np.abs(O.T @ O - np.eye(O.shape[0])))
    if err > tol:
        raise DomainError(f"matrix is not orthogonal (max |O^T O - I| = {err:.3e})")
    if abs(np.linalg.det(O) - 1.0) > det_tol:
        raise DomainError("matrix is orthogonal but not a rotation (det != +1)")


# --------------------------------------------------------------------------
# p-generalized Gaussians and l_p sphere measures
# --------------------------------------------------------------------------

def _check_p(p: float) -> float:
    p = float(p)
    if not np.isfinite(p) or p < 2:
        raise DomainError(f"p must be a finite real >= 2, got {p}")
    return p


def sample_p_gaussian(p: float, n: int, rng: RngLike, size: Optional[int] = None) -> np.ndarray:
    """I.i.d. coordinates with density proportional to exp(-|x|^p / p).

    |Z|^p is Gamma(1/p, scale=p); a uniform random sign is attached.
    Returns shape ``(n,)`` or ``(size, n)``.
    """
    p = _check_p(p)
    if n < 1:
        raise DomainError("n must be at least 1")
    gen = as_generator(rng)
    shape = (n,) if size is None else (int(size), n)
    G = gen.gamma(1.0 / p, scale=p, size=shape)
    signs = np.where(gen.random(shape) < 0.5, -1.0, 1.0)
    return signs * G ** (1.0 / p)


def lp_norm(x: np.ndarray, p: float) -> np.ndarray:
    x = np.abs(np.asarray(x, dtype=float))
    scale = np.max(x, axis=-1, keepdims=True)
    scale = np.where(scale > 0, scale, 1.0)
    return scale[..., 0] * np.sum((x / scale) ** p, axis=-1) ** (1.0 / p)


def signed_power(x: np.ndarray, a: float) -> np.ndarray:
    """Entrywise sign(x) |x|^a."""
    return np.sign(x) * np.abs(x) ** a


def surface_density(theta: np.ndarray, p: float) -> np.ndarray:
    """Unnormalised density |theta^(p-1)|_2 of the surface measure w.r.t. the cone measure.

    On the unit l_p sphere this never exceeds 1, since it equals
    |theta|_{2p-2}^(p-1) and 2p - 2 >= p.
    """
    return np.sqrt(np.sum(np.abs(theta) ** (2.0 * p - 2.0), axis=-1))


@dataclass
class SphereSample:
    """Point(s) on the unit l_p sphere with their importance weights.

    ``theta`` has shape ``(n,)`` or ``(m, n)``; ``importance_weight`` is 1 for
    cone samples and |theta^(p-1)|_2 for surface-reweighted ones.
    """

    p: float
    theta: np.ndarray
    importance_weight: np.ndarray
    measure: str = "cone"

    @property
    def n(self) -> int:
        return self.theta.shape[-1]

    def reweighted(self) -> "SphereSample":
        return SphereSample(self.p, self.theta, surface_density(self.theta, self.p), "surface")


def sample_cone(p: float, n: int, rng: RngLike, size: Optional[int] = None) -> SphereSample:
    """Cone-measure sample(s) Z / |Z|_p."""
    p = _check_p(p)
    if n < 2:
        raise DomainError("sphere sampling needs n >= 2")
    Z = sample_p_gaussian(p, n, rng, size)
    theta = Z / lp_norm(Z, p)[..., None]
    return SphereSample(p, theta, np.ones(theta.shape[:-1]), "cone")


def sample_cone_blocks(p: float, n: int, replicas: int, rng: RngState,
                       block_size: int = BLOCK_SIZE) -> np.ndarray:
    """``replicas`` cone samples drawn block-wise, one stream per block.

    The block layout is fixed, so results do not depend on how blocks are
    scheduled.
    """
    if not isinstance(rng, RngState):
        raise ConfigurationError("block sampling needs an RngState")
    out = np.empty((replicas, n))
    for b, start in enumerate(range(0, replicas, block_size)):
        stop = min(start + block_size, replicas)
        out[start:stop] = sample_cone(p, n, rng.child(b), size=stop - start).theta
    return out


def self_normalized_mean(values: np.ndarray, weights: np.ndarray) -> Tuple[float, float]:
    """Weighted mean sum(w g) / sum(w) with its delta-method standard error."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    total = np.sum(weights)
    if not total > 0:
        raise RuntimeError("importance weights sum to zero")
    est = np.sum(weights * values) / total
    stderr = np.sqrt(np.sum(weights**2 * (values - est) ** 2)) / total
    return float(est), float(stderr)


def surface_expectation(p: float, n: int, integrand: Callable[[np.ndarray], np.ndarray],
                        replicas: int, rng: RngLike) -> Tuple[float, float]:
    """Self-normalised importance estimate of E[g] under the surface measure.

    Cone samples are reweighted by |theta^(p-1)|_2.  ``integrand`` maps an
    ``(m, n)`` array of sphere points to ``m`` values.
    """
    if replicas < 100:
        raise DomainError("surface_expectation needs at least 100 replicas")
    if isinstance(rng, RngState):
        theta = sample_cone_blocks(p, n, replicas, rng)
    else:
        theta = sample_cone(p, n, rng, size=replicas).theta
    g = np.asarray(integrand(theta), dtype=float)
    return self_normalized_mean(g, surface_density(theta, p))


def sample_surface_rejection(p: float, n: int, size: int, rng: RngLike,
                             max_rounds: int = 10_000) -> np.ndarray:
    """Exact surface-measure samples by rejection from the cone measure.

    Accepts a cone sample with probability |theta^(p-1)|_2 <= 1.  Acceptance
    decays polynomially in n, so this is only meant as a small-n oracle.
    """
    gen = as_generator(rng)
    kept = []
    count = 0
    for _ in range(max_rounds):
        theta = sample_cone(p, n, gen, size=max(size, 256)).theta
        keep = gen.random(theta.shape[0]) < surface_density(theta, p)
        kept.append(theta[keep])
        count += int(keep.sum())
        if count >= size:
            return np.concatenate(kept)[:size]
    raise RuntimeError("rejection sampler did not reach the requested sample size")
