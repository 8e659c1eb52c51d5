"""Command-line entry point: ``workbench verify | eval | profile``.

Exit codes: 0 when every record passes, 1 when at least one fails, 2 on
infrastructure errors (bad arguments, unreadable input, unwritable output).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import harness, hilbert, linemeasure, logdet, potential
from .errors import WorkbenchError
from .linemeasure import RealLineMeasure
from .potential import PlanarPointMeasure
from .stepfn import StepFunction, distribution_profile, rearrange_decreasing

EXIT_OK, EXIT_FAIL, EXIT_INFRA = 0, 1, 2


class UsageError(Exception):
    pass


def parse_grid(text: str) -> np.ndarray:
    """``a:b:step`` with both ends included."""
    try:
        a, b, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"grid must be a:b:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise UsageError("grid needs a <= b and step > 0")
    n = int(round((b - a) / step)) + 1
    return np.linspace(a, a + (n - 1) * step, n)


def parse_r_grid(text: str) -> np.ndarray:
    """``log:a:b:n`` (geometric) or ``lin:a:b:n``."""
    parts = text.split(":")
    try:
        mode, a, b, n = parts[0], float(parts[1]), float(parts[2]), int(parts[3])
    except (IndexError, ValueError):
        raise UsageError(f"r-grid must be log:a:b:n, got {text!r}") from None
    if len(parts) != 4 or n < 1 or a <= 0 or b < a or mode not in ("log", "lin"):
        raise UsageError("r-grid needs log|lin, 0 < a <= b and n >= 1")
    return np.geomspace(a, b, n) if mode == "log" else np.linspace(a, b, n)


def parse_z(text: str) -> complex:
    """``re+imi`` style complex literal, e.g. ``1.5-2i``, ``3i``, ``-0.25``."""
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r}") from None


def load_input(path: str):
    """A step function, real-line measure or planar point measure from JSON."""
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    if "atoms" in d and isinstance(d["atoms"], list) and d["atoms"] and len(d["atoms"][0]) == 3:
        return PlanarPointMeasure.from_dict(d)
    if "breakpoints" in d:
        return StepFunction.from_dict(d)
    return RealLineMeasure.from_dict(d)


def _need(data, cls, op):
    if not isinstance(data, cls):
        raise UsageError(f"{op} expects a {cls.__name__} input")
    return data


def _need_option(value, flag, op):
    if value is None:
        raise UsageError(f"{op} needs {flag}")
    return value


def _eval_rows(op: str, data, args) -> tuple[list[str], list[list]]:
    if op in ("hilbert", "distribution", "rearrangement", "step"):
        g = _need(data, StepFunction, op)
        x = parse_grid(_need_option(args.grid, "--grid", op))
        if op == "hilbert":
            with np.errstate(divide="ignore", invalid="ignore"):
                v = hilbert.hilbert_step(g).evaluate(x)
        elif op == "distribution":
            v = distribution_profile(g)(x)
        elif op == "rearrangement":
            v = rearrange_decreasing(g)(x)
        else:
            v = g(x)
        return ["x", op], [[a, b] for a, b in zip(x.tolist(), np.asarray(v, float).tolist())]
    if op == "logdet":
        g = _need(data, StepFunction, op)
        z = parse_z(_need_option(args.z, "--z", op))
        r = logdet.logdet_analytic(g, z)
        return ["re", "im", "u", "error_estimate"], [[z.real, z.imag, r.value, r.error_estimate]]
    if op in ("cauchy", "rg", "levels"):
        eta = _need(data, RealLineMeasure, op)
        x = parse_grid(_need_option(args.grid, "--grid", op))
        if op == "cauchy":
            with np.errstate(divide="ignore", invalid="ignore"):
                v = hilbert.hilbert_measure(eta).evaluate(x)
        elif op == "levels":
            v = linemeasure.level_profile(eta)(x)
        else:
            v = linemeasure.rg_profile(eta, t_grid=x).values
        return ["x", op], [[a, b] for a, b in zip(x.tolist(), np.asarray(v, float).tolist())]
    if op == "canonical":
        mu = _need(data, PlanarPointMeasure, op)
        z = parse_z(_need_option(args.z, "--z", op))
        return ["re", "im", "u"], [[z.real, z.imag, float(potential.canonical_eval(mu, np.array([z]))[0])]]
    if op == "counting":
        mu = _need(data, PlanarPointMeasure, op)
        rs = parse_r_grid(_need_option(args.r_grid, "--r-grid", op))
        m, n = potential.counting_profiles(mu)
        return ["r", "mu", "n"], [[r, float(m(r)), float(n(r))] for r in rs.tolist()]
    raise UsageError(f"unknown op {op!r}")


EVAL_OPS = ("step", "hilbert", "distribution", "rearrangement", "logdet", "cauchy", "levels", "rg",
            "canonical", "counting")


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    try:
        return open(path, "w", encoding="utf-8", newline=""), True
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None


def _write_rows(path, header, rows):
    fh, close = _open_out(path)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    finally:
        if close:
            fh.close()


def cmd_verify(args) -> int:
    if args.suite not in harness.SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(harness.SUITES)}")
    if args.cases < 0:
        raise UsageError("--cases must be nonnegative")
    checks = args.checks.split(",") if args.checks else None
    try:
        records = harness.run_suite(args.suite, args.cases, args.seed, checks=checks, tol=args.tol,
                                    workers=args.workers, timings=args.timings)
    except KeyError as exc:
        raise UsageError(str(exc)) from None
    fh, close = _open_out(args.out)
    try:
        harness.emit_report(records, args.format, fh)
    finally:
        if close:
            fh.close()
    s = harness.summarize(records)
    print(f"{args.suite}: {s['pass']} pass, {s['fail']} fail, {s['skipped']} skipped",
          file=sys.stderr)
    return EXIT_FAIL if s["fail"] else EXIT_OK


def cmd_eval(args) -> int:
    header, rows = _eval_rows(args.op, load_input(args.input), args)
    _write_rows(args.out, header, rows)
    return EXIT_OK


def cmd_profile(args) -> int:
    mu = _need(load_input(args.input), PlanarPointMeasure, "profile")
    emit = [e.strip() for e in args.emit.split(",") if e.strip()]
    bad = set(emit) - {"M", "T", "Tsuji", "mu", "n"}
    if bad:
        raise UsageError(f"unknown quantities {sorted(bad)}")
    rows = potential.profile_rows(mu, parse_r_grid(args.r_grid), emit)
    _write_rows(args.out, ["r", *emit], [[row["r"], *(row[e] for e in emit)] for row in rows])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="workbench", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification suite and write the report")
    v.add_argument("--suite", required=True, help=", ".join(harness.SUITES))
    v.add_argument("--cases", type=int, required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=None, help="override every non-stability tolerance")
    v.add_argument("--checks", default=None, help="comma-separated subset of the suite's checks")
    v.add_argument("--out", default="-")
    v.add_argument("--format", choices=("csv", "json"), default="csv")
    v.add_argument("--workers", type=int, default=None, help="default: WORKBENCH_THREADS or CPU count")
    v.add_argument("--timings", action="store_true", help="fill runtime_ms (breaks byte-identity)")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("eval", help="evaluate one operation on a case file")
    e.add_argument("op", choices=EVAL_OPS)
    e.add_argument("--input", required=True)
    g = e.add_mutually_exclusive_group()
    g.add_argument("--grid", help="a:b:step")
    g.add_argument("--z", help='complex point, e.g. "1+2i"')
    g.add_argument("--r-grid", dest="r_grid", help="log:a:b:n")
    e.add_argument("--out", default="-")
    e.set_defaults(func=cmd_eval)

    pr = sub.add_parser("profile", help="radial profiles of a planar point measure")
    pr.add_argument("--input", required=True)
    pr.add_argument("--emit", default="M,T,Tsuji,mu,n")
    pr.add_argument("--r-grid", dest="r_grid", default="log:0.1:10:25")
    pr.add_argument("--out", default="-")
    pr.set_defaults(func=cmd_profile)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INFRA
    try:
        return args.func(args)
    except (UsageError, WorkbenchError, OSError) as exc:
        print(f"workbench: {exc}", file=sys.stderr)
        return EXIT_INFRA


if __name__ == "__main__":
    sys.exit(main())
