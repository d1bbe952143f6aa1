"""Command-line front end: one subcommand per experiment, CSV or JSON output.

Exit status is 0 on success, 1 when an experiment flags a certificate
violation (or a failed check) and 2 on configuration errors.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import certificates as certs
from .errors import ConclabError, ConfigurationError
from .exact_moments import cone_moment_bound, exact_moment_cone, exact_neg_moment_pgauss, exact_signed_moment_cone
from .experiments import checks
from .experiments.matrix import (run_local_law, run_max_weight_tails, run_sudakov_pointwise,
                                 run_sudakov_tails)
from .experiments.results import dumps_json, rows_to_csv
from .experiments.sphere import (ElementaryPolynomial, run_hanson_wright, run_lipschitz_tails,
                                 run_lsq_empirical, run_polynomial_tails)
from .experiments.symmetric import FAMILIES, quartic_rademacher_family, run_edgeworth, run_symmetric_tails
from .geometry import ricci_vanishing_check
from .sampling import (RngState, check_orthogonal, entry_distribution, sample_cone_blocks, sample_haar_so,
                       sample_p_gaussian, surface_density)

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2

# stream tags for draws made directly by the CLI
_TAG_SAMPLE = 41
_TAG_MATRIX = 42
_TAG_SELFTEST = 43

# keys of the parsed namespace that are not experiment parameters
_META_KEYS = {"command", "out", "summary", "format", "threads", "seed", "handler", "parser"}


@dataclass
class Report:
    """What a subcommand produced: CSV text, a JSON payload and an optional bare-text form."""

    csv: str
    data: object
    constants: Dict[str, object] = field(default_factory=dict)
    passed: bool = True
    text: Optional[str] = None


def _floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _dict_csv(record: Dict[str, object]) -> str:
    return rows_to_csv(list(record), [[v if not isinstance(v, (dict, list)) else str(v) for v in record.values()]])


def _rng(args) -> RngState:
    return RngState(args.seed)


# --------------------------------------------------------------------------
# handlers
# --------------------------------------------------------------------------

def cmd_sample(args) -> Report:
    rng = _rng(args).child(_TAG_SAMPLE)
    n, size = args.n, args.size
    if args.kind == "haar":
        mats = [sample_haar_so(n, rng.child(r)) for r in range(size)]
        for O in mats:
            check_orthogonal(O)
        header = ["replica", "row"] + [f"c{j}" for j in range(n)]
        rows = [[r, i, *O[i]] for r, O in enumerate(mats) for i in range(n)]
        return Report(rows_to_csv(header, rows), {"matrices": mats})
    if args.kind == "pgauss":
        x = sample_p_gaussian(args.p, n, rng.generator(), size=size)
        return Report(rows_to_csv([f"x{j}" for j in range(n)], x), {"samples": x})
    theta = sample_cone_blocks(args.p, n, size, rng)
    header = [f"x{j}" for j in range(n)]
    if args.kind == "cone":
        return Report(rows_to_csv(header, theta), {"samples": theta})
    w = surface_density(theta, args.p)
    rows = [[*t, wi] for t, wi in zip(theta, w)]
    return Report(rows_to_csv(header + ["importance_weight"], rows), {"samples": theta, "importance_weight": w})


def cmd_moments(args) -> Report:
    p, n, v = args.p, args.n, args.v
    if args.kind == "abs":
        value = exact_moment_cone(p, n, v)
    elif args.kind == "signed":
        if float(v) != int(v):
            raise ConclabError("signed moments need an integer v")
        value = exact_signed_moment_cone(p, n, int(v))
    elif args.kind == "bound":
        value = cone_moment_bound(p, n, v)
    else:
        value = exact_neg_moment_pgauss(p, n, v)
    record = {"p": p, "n": n, "v": v, "kind": args.kind, "value": value}
    return Report(_dict_csv(record), record, text=repr(float(value)) + "\n")


_CERT_FLAGS = ("p", "n", "v", "sigma", "q", "d", "norms", "A_hs_q", "A_op_q", "B", "B_star", "gamma",
               "variant", "constants", "m3", "K", "r", "max_theta", "c", "c_p")


def cmd_certificate(args) -> Report:
    params = {k: getattr(args, k) for k in _CERT_FLAGS if getattr(args, k) is not None}
    cert = certs.make_certificate(args.id, **params)
    t = np.asarray(args.t, dtype=float)
    raw = np.atleast_1d(cert.raw(t))
    capped = np.atleast_1d(cert(t))
    shown = capped if args.capped else raw
    record = cert.to_record(t)
    record["raw"] = [[float(a), float(b)] for a, b in zip(t, raw)]
    csv = rows_to_csv([cert.variable, "raw", "bound"], zip(t, raw, capped))
    return Report(csv, record, constants=record["constants"],
                  text="".join(repr(float(x)) + "\n" for x in shown))


def cmd_locallaw(args) -> Report:
    if len(args.n_list) < 2:
        raise ConfigurationError("--n-list needs at least two sizes to fit a trend")
    res = run_local_law(args.n_list, args.z, entry_distribution(args.dist), args.outer, _rng(args),
                        args.inner, threads=args.threads)
    return Report(res.to_csv(), res.summary(), {"semicircle": res.semicircle}, res.passed())


def _poly_coefficients(p: float, n: int) -> np.ndarray:
    a = np.ones(n)
    if p == 2:
        return a
    r = p / (p - 2.0)
    return a / np.sum(a**r) ** (1.0 / r)


def _hw_matrix(kind: str, n: int, seed: int) -> np.ndarray:
    if kind == "identity":
        return np.eye(n)
    if kind == "diagonal":
        return np.diag(np.linspace(1.0, 2.0, n))
    G = RngState(seed).child(_TAG_MATRIX).generator().standard_normal((n, n))
    return (G + G.T) / 2.0


def cmd_tails(args) -> Report:
    rng = _rng(args)
    kind = args.kind
    grid = args.t_grid
    if kind == "sudakov":
        if args.variant == "pointwise":
            res = run_sudakov_pointwise(args.n, args.z, args.replicas or 1000, grid, rng, args.threads)
        else:
            res = run_sudakov_tails(args.n, args.z, entry_distribution(args.dist), args.outer, args.inner,
                                    grid, rng, args.threads)
    elif kind == "lipschitz":
        res = run_lipschitz_tails(args.p, args.n, args.measure, args.function, args.replicas or 10_000, grid, rng)
    elif kind == "poly":
        m = args.m if args.m is not None else max(3, math.floor(args.p) + 1)
        poly = ElementaryPolynomial(m, _poly_coefficients(args.p, args.n), args.p)
        res = run_polynomial_tails(args.p, args.n, poly, args.replicas or 10_000, rng, grid).tails
    elif kind == "hw":
        A = _hw_matrix(args.matrix, args.n, args.seed)
        res = run_hanson_wright(args.p, args.n, A, args.replicas or 10_000, grid, rng, args.constants)
    elif kind == "symmetric":
        res = run_symmetric_tails(FAMILIES[args.family](), args.n, args.replicas or 10_000, grid, rng)
    else:
        res = run_max_weight_tails(args.n, args.replicas or 10_000, grid or (4, 5, 6, 7), rng)
    return Report(res.to_csv(), dict(res.summary(), rows=[list(r) for r in res.rows()]), res.constants,
                  res.passed)


def cmd_lsq(args) -> Report:
    res = run_lsq_empirical(args.p, args.n, args.function, args.replicas, _rng(args))
    s = res.summary()
    record = {"p": res.p, "n": res.n, "function": res.function, "replicas": res.replicas,
              "entropy": res.entropy, "entropy_stderr": res.entropy_stderr, "energy": res.energy,
              "energy_stderr": res.energy_stderr, "sigma_q": res.sigma_q,
              "sigma_q_simplified": res.sigma_q_simplified, "bound": res.bound, "passed": res.passed}
    return Report(_dict_csv(record), s, s["constants"], res.passed)


def cmd_edgeworth(args) -> Report:
    res = run_edgeworth(FAMILIES[args.family](), args.n, args.replicas, _rng(args))
    record = {"family": res.family, "n": res.n, "replicas": res.replicas,
              "residual_ratio_min": res.residual_ratio_min, "residual_ratio_max": res.residual_ratio_max,
              "gamma_B": res.gamma_B, "cubic_coefficient": res.cubic_coefficient, "bounded": res.bounded,
              "cubic_term": res.cubic_term_check}
    return Report(_dict_csv(record), res.summary(), {"gamma_B": res.gamma_B}, res.passed)


def cmd_curvature(args) -> Report:
    rep = ricci_vanishing_check(args.p, args.n)
    rows = list(zip(rep.eps, rep.curvature))
    passed = rep.vanishes if args.p > 2 else abs(rep.interior_curvature - 1.0) <= 1e-12
    return Report(rows_to_csv(["eps", "curvature"], rows), rep.as_dict(),
                  {"expected_exponent": rep.expected_exponent}, bool(passed))


def selftest_rows(seed: int) -> List[list]:
    """Reduced invariant suite; one ``[check, value, tolerance, passed]`` row per check."""
    rng = RngState(seed).child(_TAG_SELFTEST)
    rows = []

    def add(name, value, tol):
        rows.append([name, float(value), float(tol), bool(value <= tol)])

    moments = checks.run_moment_check(replicas=20_000, rng=rng)
    z = [abs(r["mc"] - r["exact"]) / r["stderr"] for r in moments]
    z += [abs(r["odd_mc"]) / r["odd_stderr"] for r in moments if "odd_mc" in r]
    add("moment_oracle_max_zscore", max(z), 4.0)
    add("moment_bound_failures", sum(not r["bound_ok"] for r in moments), 0)

    res = checks.run_resolvent_suite(pairs=30, rng=rng)
    add("resolvent_bound_excess", res["bound_excess"], 0.0)
    for key in ("row_sum", "row_sum_abs", "inverse", "two_method"):
        add(f"resolvent_{key}", res[key], 1e-9)
    add("resolvent_derivative", res["derivative"], 1e-5)
    add("matrix_calculus", res["matrix_calculus"], 1e-5)

    sc = checks.run_semicircle_check()
    add("semicircle_residual", sc["max_residual"], 1e-12)
    add("semicircle_imag_deficit", -sc["min_imag"], 0.0)
    add("semicircle_s_i", sc["s_i_error"], 1e-12)

    cv = checks.run_curvature_check(trials=20, rng=rng)
    add("curvature_round", cv["round_error"], 1e-12)
    add("curvature_symmetric", cv["symmetric_error"], 1e-10)
    add("curvature_exponent_p3", cv["exponent_error_p3"], 0.05)
    add("curvature_exponent_p4", cv["exponent_error_p4"], 0.05)

    worst = 0.0
    for setting in certs.HIGHER_ORDER_SETTINGS:
        for p in (2.0, 3.0, 4.0):
            for d in (1, 2, 3):
                a = certs.higher_order_constants(setting, p, d, "log")
                b = certs.higher_order_constants(setting, p, d, "direct")
                worst = max(worst, *(abs(a[k] / b[k] - 1.0) for k in a))
    add("constants_log_vs_direct", worst, 1e-12)

    edge = run_edgeworth(quartic_rademacher_family(), 30, 200, rng)
    add("quartic_remainder_ratio", max(abs(edge.residual_ratio_max + 2), abs(edge.residual_ratio_min + 2)), 1e-12)

    cos = run_edgeworth(FAMILIES["cos"](), 30, 200, rng)
    add("cos_remainder_excess", max(abs(cos.residual_ratio_max), abs(cos.residual_ratio_min)) - cos.gamma_B, 0.0)

    lsq = run_lsq_empirical(2.0, 20, "bilinear", 10_000, rng)
    add("lsq_entropy_failures", int(not lsq.passed), 0)

    mw = run_max_weight_tails(20, 200, (4, 5, 6, 7), rng)
    add("row_sum_deviation", mw.diagnostics["row_sum_deviation"], 1e-12)
    add("max_weight_violations", int(np.sum(mw.empirical_tail > mw.certificate)), 0)

    lip = run_lipschitz_tails(2.0, 20, "cone", "coordinate", 2000, None, rng)
    add("cone_lipschitz_violations", int(np.sum(lip.violations)), 0)
    return rows


def cmd_selftest(args) -> Report:
    rows = selftest_rows(args.seed)
    passed = all(r[3] for r in rows)
    data = [{"check": r[0], "value": r[1], "tolerance": r[2], "passed": r[3]} for r in rows]
    return Report(rows_to_csv(["check", "value", "tolerance", "passed"], rows), data, {}, passed)


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _common(sp: argparse.ArgumentParser, seed: Optional[str]) -> None:
    if seed == "required":
        sp.add_argument("--seed", type=_seed, required=True, help="master seed (unsigned 64-bit)")
    elif seed == "default":
        sp.add_argument("--seed", type=_seed, default=0, help="master seed (default 0)")
    sp.add_argument("--out", help="output file (default: standard output)")
    sp.add_argument("--format", choices=("csv", "json", "text"), default=None,
                    help="output format; 'text' is available for scalar commands")
    sp.add_argument("--summary", help="also write a JSON run summary to this path")
    sp.add_argument("--threads", type=int, default=None,
                    help="worker threads, 0 = one per CPU (default: $CONCLAB_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conclab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def add(name, handler, seed, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        _common(sp, seed)
        sp.set_defaults(handler=handler, parser=sp)
        return sp

    sp = add("sample", cmd_sample, "required", "draw sphere, p-Gaussian or Haar samples")
    sp.add_argument("kind", choices=("cone", "surface", "haar", "pgauss"))
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--size", type=int, default=1)

    sp = add("moments", cmd_moments, None, "exact moments of a cone-measure coordinate")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--v", type=float, required=True)
    sp.add_argument("--kind", choices=("abs", "signed", "bound", "neg"), default="abs",
                    help="abs: E|theta_1|^v; signed: E theta_1^v; bound: its upper bound; "
                         "neg: E|Z|_p^-v for the p-Gaussian vector")

    sp = add("certificate", cmd_certificate, None, "evaluate a tail certificate on a grid")
    sp.add_argument("--id", required=True, choices=certs.THEOREM_IDS)
    sp.add_argument("--t", type=_floats, required=True, help="comma-separated evaluation points")
    sp.add_argument("--capped", action="store_true", help="print min(1, bound) instead of the raw bound")
    for name, typ in (("p", float), ("n", int), ("v", float), ("sigma", float), ("q", float), ("d", int),
                      ("norms", _floats), ("A-hs-q", float), ("A-op-q", float), ("B", float),
                      ("B-star", float), ("gamma", float), ("m3", float), ("K", float), ("r", float),
                      ("max-theta", float), ("c", float), ("c-p", float)):
        sp.add_argument(f"--{name}", type=typ, default=None)
    sp.add_argument("--variant", default=None)
    sp.add_argument("--constants", choices=("rate", "derived"), default=None)

    sp = add("locallaw", cmd_locallaw, "required", "mean Stieltjes transform of weighted matrices")
    sp.add_argument("--n-list", type=_ints, default=[50, 100, 200, 400])
    sp.add_argument("--z", type=complex, default=0.2 + 0.5j)
    sp.add_argument("--dist", default="gaussian")
    sp.add_argument("--outer", type=int, default=200)
    sp.add_argument("--inner", type=int, default=16)

    sp = add("tails", cmd_tails, "required", "empirical tails against a certificate")
    sp.add_argument("kind", choices=("sudakov", "lipschitz", "poly", "hw", "symmetric", "maxweight"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--replicas", type=int, default=None)
    sp.add_argument("--t-grid", type=_floats, default=None)
    sp.add_argument("--variant", choices=("theta", "pointwise"), default="theta", help="sudakov only")
    sp.add_argument("--z", type=complex, default=1j, help="sudakov only")
    sp.add_argument("--dist", default="gaussian", help="sudakov only")
    sp.add_argument("--outer", type=int, default=300, help="sudakov only")
    sp.add_argument("--inner", type=int, default=100, help="sudakov only")
    sp.add_argument("--measure", choices=("cone", "surface"), default="cone", help="lipschitz only")
    sp.add_argument("--function", default="coordinate", help="lipschitz only")
    sp.add_argument("--m", type=int, default=None, help="poly only")
    sp.add_argument("--matrix", choices=("identity", "diagonal", "random"), default="identity", help="hw only")
    sp.add_argument("--constants", choices=("rate", "derived"), default="derived", help="hw only")
    sp.add_argument("--family", choices=sorted(FAMILIES), default="quartic", help="symmetric only")

    sp = add("lsq-check", cmd_lsq, "required", "entropy against the LS_q right-hand side")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--function", default="coordinate")
    sp.add_argument("--replicas", type=int, default=10_000)

    sp = add("edgeworth", cmd_edgeworth, "required", "fourth-order remainder of a symmetric family")
    sp.add_argument("--family", choices=sorted(FAMILIES), default="quartic")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--replicas", type=int, default=1000)

    sp = add("curvature", cmd_curvature, None, "sectional curvature along an eps-path")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--n", type=int, default=4)

    add("selftest", cmd_selftest, "default", "reduced invariant suite")
    return parser


def _params(args) -> Dict[str, object]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _META_KEYS and v is not None}


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler: Callable = args.handler
    try:
        report = handler(args)
        fmt = args.format or ("text" if report.text is not None else "csv")
        if fmt == "text" and report.text is None:
            raise ConclabError(f"'{args.command}' has no text output; use csv or json")
        summary = {"command": args.command, "params": _params(args), "constants_used": report.constants,
                   "seed": getattr(args, "seed", None), "pass": bool(report.passed),
                   "artifacts": [args.out] if args.out else []}
        if fmt == "json":
            body = dumps_json(dict(summary, data=report.data))
        else:
            body = report.text if fmt == "text" else report.csv
        _write(args.out, body)
        if args.summary:
            _write(args.summary, dumps_json(summary))
    except (ConclabError, KeyError, OSError) as exc:
        args.parser.print_usage(sys.stderr)
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"{args.parser.prog}: error: {msg}\n")
        return EXIT_CONFIG
    return EXIT_OK if report.passed else EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
