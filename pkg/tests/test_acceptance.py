"""Acceptance suite: eleven end-to-end criteria at their stated tolerances and runtime budgets.

Every criterion prints one ``[ACCEPTANCE] k PASS|FAIL`` line.  Monte Carlo
criteria use the fixed master seed ``SEED``.
"""
import subprocess
import sys
import time

import numpy as np
import pytest

from conclab.experiments import (FAMILIES, ElementaryPolynomial, run_curvature_check, run_edgeworth,
                                 run_hanson_wright, run_lipschitz_tails, run_local_law, run_lsq_empirical,
                                 run_max_weight_tails, run_moment_check, run_polynomial_tails,
                                 run_resolvent_suite, run_semicircle_check, run_sudakov_pointwise,
                                 run_sudakov_tails, run_symmetric_tails)
from conclab.sampling import RngState

SEED = 20240601

pytestmark = pytest.mark.slow


@pytest.fixture
def report(request):
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    start = time.perf_counter()

    def emit(number, name, ok, detail="", budget=None):
        elapsed = time.perf_counter() - start
        within = budget is None or elapsed < budget
        line = (f"[ACCEPTANCE] {number:>2} {'PASS' if ok and within else 'FAIL'}  {name}  "
                f"({elapsed:.1f}s{'' if budget is None else f' / {budget:.0f}s budget'}) {detail}")
        print(line)
        if reporter is not None:
            reporter.write_line(line)
        assert ok, line
        assert within, line

    return emit


def test_01_moment_oracle(report):
    rows = run_moment_check((2, 3, 4), (5, 10), (1, 2, 3, 4), 100_000, RngState(SEED))
    bad = [r for r in rows if not r["ok"] or not r.get("odd_ok", True) or not r["bound_ok"]]
    z = max(abs(r["mc"] - r["exact"]) / r["stderr"] for r in rows)
    report(1, "moment oracle agreement", not bad, f"max z={z:.2f}, failures={len(bad)}", budget=60)


def test_02_resolvent_identities(report):
    res = run_resolvent_suite(pairs=100, n=20, rng=RngState(SEED))
    ok = (res["bound_excess"] <= 0
          and max(res["row_sum"], res["row_sum_abs"], res["inverse"], res["two_method"]) <= 1e-9
          and res["derivative"] <= 1e-5 and res["matrix_calculus"] <= 1e-5)
    detail = ", ".join(f"{k}={v:.2e}" for k, v in res.items())
    report(2, "resolvent identity suite", ok, detail, budget=60)


def test_03_semicircle_branch(report):
    res = run_semicircle_check(100)
    ok = res["max_residual"] <= 1e-12 and res["min_imag"] >= 0 and res["s_i_error"] <= 1e-12
    report(3, "semicircle branch", ok, f"residual={res['max_residual']:.1e}", budget=1)


def test_04_weight_structure(report):
    worst, excess = 0.0, []
    for n in (20, 50):
        res = run_max_weight_tails(n, 10_000, (4, 5, 6, 7), RngState(SEED))
        worst = max(worst, res.diagnostics["row_sum_deviation"])
        excess.extend(res.empirical_tail - res.certificate)
    ok = worst <= 1e-12 and max(excess) <= 0
    report(4, "weight structure", ok, f"row-sum dev={worst:.1e}, max tail-bound={max(excess):.2e}", budget=120)


def test_05_local_law_trend(report):
    res = run_local_law((50, 100, 200, 400), 0.2 + 0.5j, outer_replicas=200, rng=RngState(SEED))
    dev = ", ".join(f"{d:.2e}" for d in res.deviation)
    report(5, "local law trend", res.passed() and res.positive_imag,
           f"deviations=[{dev}] slope={res.slope:.2f}", budget=600)


def test_06_sudakov_tails(report):
    nested = run_sudakov_tails(50, 1j, outer=300, inner=100, rng=RngState(SEED))
    pointwise = run_sudakov_pointwise(100, 1j, 1000, rng=RngState(SEED))
    ok = not nested.violation and not pointwise.violation
    report(6, "Sudakov tails", ok, f"inner noise={nested.diagnostics['inner_noise']:.1e}, "
           f"{_informative([nested, pointwise])}", budget=600)


def _informative(results):
    """How many grid points carry a certificate below 1, i.e. a non-vacuous bound."""
    cert = np.concatenate([r.certificate for r in results])
    return f"grid points with bound < 1: {int(np.sum(cert < 1))}/{cert.size}"


def _sphere_runs():
    rng = RngState(SEED)
    for p in (2.0, 4.0):
        for n in (20, 50):
            for f in ("coordinate", "l2norm"):
                yield f"cone {f} p={p:g} n={n}", run_lipschitz_tails(p, n, "cone", f, 10_000, rng=rng)
                yield f"surface {f} p={p:g} n={n}", run_lipschitz_tails(p, n, "surface", f, 10_000, rng=rng)
            # m must exceed p, so p = 4 uses degrees 5 and 6 in place of 3 and 4
            for m in ((3, 4) if p == 2 else (5, 6)):
                a = np.ones(n) if p == 2 else np.ones(n) / n ** ((p - 2) / p)
                poly = run_polynomial_tails(p, n, ElementaryPolynomial(m, a, p), 10_000, rng)
                yield f"poly m={m} p={p:g} n={n}", poly.tails
            E = np.zeros((n, n))
            E[0, 1] = E[1, 0] = 1.0
            G = np.random.default_rng(n).standard_normal((n, n))
            for label, A in (("offdiag", E), ("diag", np.diag(np.linspace(1, 2, n))), ("random", (G + G.T) / 2)):
                yield f"hw {label} p={p:g} n={n}", run_hanson_wright(p, n, A, 10_000, rng=rng)


def test_07_sphere_concentration(report):
    runs = list(_sphere_runs())
    failed = [name for name, res in runs if not res.passed]
    report(7, "sphere concentration", not failed, f"failed={failed}, {_informative(r for _, r in runs)}", budget=600)


def test_08_empirical_lsq(report):
    results = [run_lsq_empirical(p, 20, f, 10_000, RngState(SEED))
               for p in (2.0, 4.0) for f in ("coordinate", "bilinear", "exp")]
    worst = max(r.entropy / (1.1 * r.bound) for r in results)
    report(8, "empirical LS_q", all(r.passed for r in results), f"max entropy/(1.1 bound)={worst:.3f}", budget=120)


def test_09_edgeworth(report):
    quartic = run_edgeworth(FAMILIES["quartic"](), 30, 1000, RngState(SEED))
    exact = max(abs(quartic.residual_ratio_max + 2), abs(quartic.residual_ratio_min + 2)) <= 1e-12
    cubic = abs(quartic.cubic_coefficient) <= 1e-12
    cos = run_edgeworth(FAMILIES["cos"](), 30, 1000, RngState(SEED))
    tails = [run_symmetric_tails(FAMILIES[name](), 30, 10_000, rng=RngState(SEED)) for name in ("quartic", "cos")]
    ok = exact and cubic and cos.passed and not any(t.violation for t in tails)
    report(9, "Edgeworth exactness", ok,
           f"cos ratio in [{cos.residual_ratio_min:.4f}, {cos.residual_ratio_max:.4f}], {_informative(tails)}",
           budget=120)


def test_10_curvature(report):
    res = run_curvature_check(100, RngState(SEED))
    ok = (res["round_error"] <= 1e-12 and res["symmetric_error"] <= 1e-10
          and res["exponent_error_p3"] <= 0.05 and res["exponent_error_p4"] <= 0.05)
    report(10, "curvature", ok, f"exponents {res['exponent_p3']:.4f}, {res['exponent_p4']:.4f}", budget=1)


def test_11_reproducibility(report, tmp_path):
    outputs = []
    for k in range(2):
        csv_path, json_path = tmp_path / f"run{k}.csv", tmp_path / f"run{k}.json"
        proc = subprocess.run([sys.executable, "-m", "conclab", "selftest", "--seed", str(SEED),
                               "--out", str(csv_path), "--summary", str(json_path)], capture_output=True)
        assert proc.returncode == 0, proc.stderr.decode()
        # the artifact list names the output path, so compare with the paths normalised
        outputs.append((csv_path.read_bytes(), json_path.read_bytes().replace(f"run{k}".encode(), b"run")))
    report(11, "reproducibility", outputs[0] == outputs[1], "selftest CSV and JSON byte-identical", budget=60)
