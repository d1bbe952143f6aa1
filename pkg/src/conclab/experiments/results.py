"""Result containers, tail estimation and deterministic serialisation."""
from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from ..errors import ConfigurationError
from ..sampling import self_normalized_mean


def fmt(x) -> str:
    """Shortest round-trip text for a float; stable across runs."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, complex):
        return f"{x.real!r}{x.imag:+}j"
    return repr(float(x))


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and complex numbers for ``json``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def rows_to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


# --------------------------------------------------------------------------
# parallel replicas
# --------------------------------------------------------------------------

def resolve_threads(threads: Optional[int] = None) -> int:
    """Worker count: explicit value, else CONCLAB_THREADS, else 1; 0 means one per CPU."""
    if threads is None:
        env = os.environ.get("CONCLAB_THREADS")
        if env is None or env == "":
            return 1
        try:
            threads = int(env)
        except ValueError:
            raise ConfigurationError(f"CONCLAB_THREADS must be an integer, got {env!r}") from None
    if threads < 0:
        raise ConfigurationError("threads must be >= 0")
    return threads or (os.cpu_count() or 1)


def parallel_map(fn: Callable, items: Sequence, threads: Optional[int] = None) -> List:
    """``[fn(x) for x in items]`` with optional threads; output order always follows ``items``."""
    workers = resolve_threads(threads)
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# tails
# --------------------------------------------------------------------------

def empirical_tail(values: np.ndarray, t_grid: Sequence[float],
                   weights: Optional[np.ndarray] = None):
    """P(values >= t) on a grid with binomial or self-normalised standard errors."""
    values = np.asarray(values, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    tail = np.empty(t_grid.size)
    se = np.empty(t_grid.size)
    for k, t in enumerate(t_grid):
        hit = (values >= t).astype(float)
        if weights is None:
            tail[k] = np.mean(hit)
            se[k] = np.sqrt(tail[k] * (1.0 - tail[k]) / values.size)
        else:
            tail[k], se[k] = self_normalized_mean(hit, weights)
    return tail, se


def isotonic_tail(tail: np.ndarray) -> np.ndarray:
    """Running minimum, the nonincreasing envelope of an empirical tail."""
    return np.minimum.accumulate(np.asarray(tail, dtype=float))


@dataclass
class TailExperimentResult:
    """Empirical tail of a statistic against a certificate on a grid of t."""

    experiment: str
    t_grid: np.ndarray
    empirical_tail: np.ndarray
    empirical_stderr: np.ndarray
    certificate: np.ndarray
    n: int
    p: float
    replicas: int
    seed: int
    theorem_id: str = ""
    params: Dict[str, object] = field(default_factory=dict)
    constants: Dict[str, float] = field(default_factory=dict)
    diagnostics: Dict[str, object] = field(default_factory=dict)

    @property
    def corrected_tail(self) -> np.ndarray:
        return isotonic_tail(self.empirical_tail)

    @property
    def violations(self) -> np.ndarray:
        return self.corrected_tail - 3.0 * self.empirical_stderr > self.certificate

    @property
    def violation(self) -> bool:
        return bool(np.any(self.violations))

    @property
    def passed(self) -> bool:
        return not self.violation and bool(self.diagnostics.get("extra_pass", True))

    CSV_HEADER = ("experiment", "t", "empirical_tail", "corrected_tail", "stderr", "certificate", "violation")

    def rows(self):
        for k in range(self.t_grid.size):
            yield (self.experiment, self.t_grid[k], self.empirical_tail[k], self.corrected_tail[k],
                   self.empirical_stderr[k], self.certificate[k], bool(self.violations[k]))

    def to_csv(self) -> str:
        return rows_to_csv(self.CSV_HEADER, self.rows())

    def summary(self) -> dict:
        return {
            "experiment": self.experiment,
            "theorem_id": self.theorem_id,
            "params": dict(self.params, n=self.n, p=self.p, replicas=self.replicas),
            "seed": self.seed,
            "constants": self.constants,
            "diagnostics": self.diagnostics,
            "pass_flags": {"no_violation": not self.violation, "passed": self.passed},
        }


def tail_result(experiment: str, stat: np.ndarray, t_grid: Sequence[float], certificate, *,
                n: int, p: float, seed: int, weights: Optional[np.ndarray] = None,
                params: Optional[dict] = None, diagnostics: Optional[dict] = None) -> TailExperimentResult:
    """Assemble a :class:`TailExperimentResult` from raw statistic values and a certificate object."""
    t_grid = np.asarray(t_grid, dtype=float)
    tail, se = empirical_tail(stat, t_grid, weights)
    bound = np.atleast_1d(certificate(t_grid)).astype(float)
    return TailExperimentResult(experiment, t_grid, tail, se, bound, n, p, int(np.size(stat)), seed,
                                theorem_id=certificate.theorem_id,
                                params=dict(params or {}), constants=dict(certificate.constants),
                                diagnostics=dict(diagnostics or {}))


@dataclass
class LocalLawResult:
    """Mean Stieltjes transform of weighted matrices against the semicircle, per n."""

    n_list: np.ndarray
    z: complex
    mean_s: np.ndarray
    stderr: np.ndarray
    deviation: np.ndarray
    semicircle: complex
    slope: float
    rate: np.ndarray
    outer_replicas: int
    inner_replicas: int
    seed: int
    distribution: str = "gaussian"

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.deviation) < 0))

    @property
    def positive_imag(self) -> bool:
        return bool(np.all(np.sign(self.mean_s.imag) == np.sign(self.z.imag)))

    def passed(self, max_slope: float = -0.3) -> bool:
        return self.monotone and np.isfinite(self.slope) and self.slope <= max_slope

    CSV_HEADER = ("n", "mean_s_re", "mean_s_im", "stderr", "deviation", "rate")

    def to_csv(self) -> str:
        rows = ((n, m.real, m.imag, s, d, r) for n, m, s, d, r in
                zip(self.n_list, self.mean_s, self.stderr, self.deviation, self.rate))
        return rows_to_csv(self.CSV_HEADER, rows)

    def summary(self) -> dict:
        return {
            "experiment": "local_law",
            "params": {"n_list": self.n_list, "z": self.z, "outer_replicas": self.outer_replicas,
                       "inner_replicas": self.inner_replicas, "distribution": self.distribution},
            "seed": self.seed,
            "semicircle": self.semicircle,
            "slope": self.slope,
            "pass_flags": {"monotone": self.monotone, "slope": bool(self.slope <= -0.3),
                           "positive_imag": self.positive_imag},
        }
