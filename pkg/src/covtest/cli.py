"""Command-line front end.

Exit codes: 0 success (ACCEPT for ``test``), 1 REJECT, 2 usage or computation
error.  Parameters come from flags, optionally on top of a JSON manifest
(``--manifest``); flags win.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .covariance import CovarianceModel, ObservationWindow, compute_cp, default_dt, load_table_csv
from .criterion import TestConfig, compute_threshold, decide, monte_carlo_level, tail_curve
from .errors import CovTestError
from .simulate import (
    correlogram,
    read_path_csv,
    simulate_path,
    test_statistic,
    write_correlogram_csv,
    write_path_csv,
)
from .tailbound import TailBoundParams, z_threshold

EXIT_OK, EXIT_REJECT, EXIT_ERROR = 0, 1, 2

DEFAULTS = {
    "model": "exp",
    "B": 1.0,
    "a": 1.0,
    "table": None,
    "T": 100.0,
    "A": 2.0,
    "dt": None,
    "p": 2.0,
    "delta": 0.05,
    "seed": 0,
    "reps": 1000,
    "out": None,
    "workers": 1,
    "method": "circulant",
    "pad": 1,
    "points": 50,
    "cp": None,
    "correlogram_out": None,
}


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    subcommand: str
    model: CovarianceModel
    window: Optional[ObservationWindow]
    p: float
    delta: float
    seed: int
    reps: int
    workers: int
    method: str
    pad: int
    points: int
    cp: Optional[float]
    out: Optional[str]
    correlogram_out: Optional[str] = None
    path_csv: Optional[str] = None


def _fmt(x) -> str:
    return f"{x:.17g}"


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model and window")
    g.add_argument("--manifest", help="JSON file with default values for any flag")
    g.add_argument("--model", choices=["exp", "sqexp", "table"])
    g.add_argument("--B", type=float)
    g.add_argument("--a", type=float)
    g.add_argument("--table", help="lag,value CSV for --model table")
    g.add_argument("--T", type=float)
    g.add_argument("--A", type=float)
    g.add_argument("--dt", type=float)
    g.add_argument("--p", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--reps", type=int)
    g.add_argument("--out")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="covtest", description="L_p test for the covariance of a stationary Gaussian process")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sub.add_parser("threshold", parents=[common], help="print C_p, z_p, eps_delta and S_delta")

    p = sub.add_parser("simulate", parents=[common], help="write a simulated path as t,x CSV")
    p.add_argument("--method", choices=["circulant", "cholesky"])
    p.add_argument("--pad", type=int, help="circulant embedding size multiplier")

    p = sub.add_parser("test", parents=[common], help="test a stored path against the null model")
    p.add_argument("path_csv")
    p.add_argument("--correlogram-out", dest="correlogram_out")

    p = sub.add_parser("mc-level", parents=[common], help="Monte Carlo rejection rate")
    p.add_argument("--workers", type=int)
    p.add_argument("--method", choices=["circulant", "cholesky"])

    p = sub.add_parser("tail-curve", parents=[common], help="g(eps) on a geometric grid from z_p to 1000 z_p")
    p.add_argument("--points", type=int)
    p.add_argument("--cp", type=float, help="use this C_p instead of computing it from the model")
    return parser


def _merged(args) -> dict:
    values = dict(DEFAULTS)
    if args.manifest:
        try:
            with open(args.manifest) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read manifest {args.manifest}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("manifest must be a JSON object")
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown manifest keys: {', '.join(sorted(unknown))}")
        values.update(data)
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return values


def _positive(values, name, integer=False):
    v = values[name]
    try:
        v = int(v) if integer else float(v)
    except (TypeError, ValueError):
        raise UsageError(f"invalid --{name}: {values[name]!r} is not a number") from None
    if not (math.isfinite(v) and v > 0):
        raise UsageError(f"invalid --{name}: must be positive, got {values[name]!r}")
    return v


def resolve_manifest(args) -> RunManifest:
    """Validate every parameter before any computation."""
    values = _merged(args)
    kind = values["model"]
    if kind == "table":
        if not values["table"]:
            raise UsageError("invalid --table: required with --model table")
        model = load_table_csv(values["table"])
    elif kind in ("exp", "sqexp"):
        B, a = _positive(values, "B"), _positive(values, "a")
        model = CovarianceModel.exponential(B, a) if kind == "exp" else CovarianceModel.squared_exponential(B, a)
    else:
        raise UsageError(f"invalid --model: {kind!r}")

    T, A = _positive(values, "T"), _positive(values, "A")
    if values["dt"] is None:
        dt = default_dt(model, T, A)
        if dt is None:
            raise UsageError("invalid --dt: required (no default step for this model and window)")
    else:
        dt = _positive(values, "dt")
    try:
        window = ObservationWindow(T, A, dt)
    except CovTestError as exc:
        raise UsageError(f"invalid window (--T/--A/--dt): {exc}") from None

    p = float(values["p"])
    if not (math.isfinite(p) and p >= 1):
        raise UsageError(f"invalid --p: must be >= 1, got {values['p']!r}")
    delta = float(values["delta"])
    if not 0 < delta < 1:
        raise UsageError(f"invalid --delta: must lie in (0, 1), got {values['delta']!r}")
    seed = int(values["seed"])
    if seed < 0:
        raise UsageError(f"invalid --seed: must be >= 0, got {seed!r}")
    cp = None if values["cp"] is None else _positive(values, "cp")
    if values["method"] not in ("circulant", "cholesky"):
        raise UsageError(f"invalid --method: {values['method']!r}")
    return RunManifest(
        subcommand=args.subcommand,
        model=model,
        window=window,
        p=p,
        delta=delta,
        seed=seed,
        reps=_positive(values, "reps", integer=True),
        workers=_positive(values, "workers", integer=True),
        method=values["method"],
        pad=_positive(values, "pad", integer=True),
        points=max(2, _positive(values, "points", integer=True)),
        cp=cp,
        out=values["out"],
        correlogram_out=values["correlogram_out"],
        path_csv=getattr(args, "path_csv", None),
    )


def _emit(text: str, out: Optional[str]):
    if out and out != "-":
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(m: RunManifest) -> TestConfig:
    return TestConfig(m.delta, m.p, m.window, m.model)


def cmd_threshold(m: RunManifest) -> int:
    th = compute_threshold(_config(m))
    report = {
        "cp": th.cp,
        "z_p": th.z_p,
        "epsilon_delta": th.epsilon_delta,
        "S_delta": th.threshold,
        "threshold_branch": th.branch.value,
        "p": m.p,
        "delta": m.delta,
        "T": m.window.T,
        "A": m.window.A,
    }
    for key in ("cp", "z_p", "epsilon_delta", "S_delta"):
        print(f"{key:<18}{_fmt(report[key])}")
    print(f"{'threshold_branch':<18}{th.branch.value}")
    if m.out:
        with open(m.out, "w") as fh:
            fh.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_simulate(m: RunManifest) -> int:
    path = simulate_path(m.model, m.window, m.seed, method=m.method, pad=m.pad)
    if not m.out or m.out == "-":
        raise UsageError("invalid --out: simulate needs an output file")
    write_path_csv(path, m.out)
    return EXIT_OK


def cmd_test(m: RunManifest) -> int:
    path = read_path_csv(m.path_csv)
    corr = correlogram(path, m.window)
    if m.correlogram_out:
        write_correlogram_csv(corr, m.correlogram_out)
    stat = test_statistic(corr, m.model, m.window.A, m.p)
    dec = decide(stat, compute_threshold(_config(m)))
    print(f"{'statistic':<11}{_fmt(dec.statistic)}")
    print(f"{'S_delta':<11}{_fmt(dec.threshold)}")
    print(f"{'verdict':<11}{'ACCEPT' if dec.accepted else 'REJECT'}")
    if m.out:
        with open(m.out, "w") as fh:
            fh.write(json.dumps(dec.to_dict(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK if dec.accepted else EXIT_REJECT


def cmd_mc_level(m: RunManifest) -> int:
    report = monte_carlo_level(m.model, _config(m), m.reps, m.seed, workers=m.workers, method=m.method)
    _emit(report.to_json() + "\n", m.out)
    return EXIT_OK


def cmd_tail_curve(m: RunManifest) -> int:
    cp = m.cp if m.cp is not None else compute_cp(m.model, m.window, m.p)
    params = TailBoundParams(m.p, cp)
    z = z_threshold(params)
    eps = np.geomspace(z, 1e3 * z, m.points)
    eps[0] = z
    rows = tail_curve(params, eps)
    lines = ["epsilon,g,valid"] + [f"{_fmt(e)},{_fmt(g)},{str(v).lower()}" for e, g, v in rows]
    _emit("\n".join(lines) + "\n", m.out)
    return EXIT_OK


COMMANDS = {
    "threshold": cmd_threshold,
    "simulate": cmd_simulate,
    "test": cmd_test,
    "mc-level": cmd_mc_level,
    "tail-curve": cmd_tail_curve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        manifest = resolve_manifest(args)
        return COMMANDS[args.subcommand](manifest)
    except (UsageError, CovTestError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
