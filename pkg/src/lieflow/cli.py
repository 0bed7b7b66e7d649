"""Command-line front end: classify, simulate, verify, sweep.

Exit codes: ``classify`` returns 0 for periodic, 1 for non-periodic and 2 for
all-fixed; ``verify`` returns 0 when every claim passes and 1 otherwise.
Usage and input errors exit with 3 for every command.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .algebra import get_algebra
from .errors import LieFlowError
from .flows import METHODS, sample_trajectory
from .geometry import detect_period
from .groups import identity, random_element
from .parallel import thread_count
from .rng import XorShift64Star
from .serialize import csv_text, dumps, fmt
from .spectral import (
    ALL_FIXED,
    NON_PERIODIC,
    PERIODIC,
    analyze_derivation,
    so4_periodicity_criterion,
)
from .suites import SUITE_NAMES, SuiteConfig, UnknownSuite, run_suites

log = logging.getLogger("lieflow")

EXIT_PERIODIC, EXIT_NON_PERIODIC, EXIT_ALL_FIXED, EXIT_ERROR = 0, 1, 2, 3
MAX_SWEEP_POINTS = 10**6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default, which would collide with "all-fixed"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    command: str
    group: str
    coefficients: tuple[float, ...] | None
    flow: str
    horizon: float | None
    samples: int | None
    tol: float | None
    seed: int
    suite: str
    fmt: str
    out: str | None
    method: str
    trials: int | None
    grid: str | None
    a: float
    f: float
    start: str
    timings: bool


def parse_coefficients(text: str | None) -> tuple[float, ...] | None:
    if text is None:
        return None
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise UsageError(f"--x must be comma-separated reals: {exc}") from None
    if not all(math.isfinite(v) for v in vals):
        raise UsageError("--x entries must be finite")
    return vals


def _element(cfg: RunConfig):
    alg = get_algebra(cfg.group)
    if cfg.coefficients is None:
        raise UsageError("--x is required")
    if len(cfg.coefficients) != alg.dim:
        raise UsageError(f"{alg.name} needs {alg.dim} coefficients, got {len(cfg.coefficients)}")
    return alg.element(cfg.coefficients)


def _emit(text: str, cfg: RunConfig) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------


def cmd_classify(cfg: RunConfig) -> int:
    X = _element(cfg)
    rep = analyze_derivation(X)
    if cfg.fmt == "csv":
        v = rep.verdict
        header = [f"x{i}" for i in range(len(rep.coefficients))] + ["verdict", "period"]
        row = [float(c) for c in rep.coefficients] + [v.kind, "" if v.period is None else float(v.period)]
        _emit(csv_text(header, [row]), cfg)
    else:
        _emit(dumps(rep.to_dict()), cfg)
    return {PERIODIC: EXIT_PERIODIC, NON_PERIODIC: EXIT_NON_PERIODIC, ALL_FIXED: EXIT_ALL_FIXED}[rep.verdict.kind]


def cmd_simulate(cfg: RunConfig) -> int:
    X = _element(cfg)
    if cfg.horizon is None or not cfg.horizon > 0:
        raise UsageError("--horizon must be positive")
    n = cfg.samples or 100
    if n < 2:
        raise UsageError("--samples must be at least 2")
    rng = XorShift64Star(cfg.seed)
    g = identity(cfg.group) if cfg.start == "identity" else random_element(cfg.group, rng)
    traj = sample_trajectory(X, g, cfg.horizon, n, cfg.flow, cfg.method)
    _emit(traj.to_csv(), cfg)
    first, last = traj.points[0].matrix, traj.points[-1].matrix
    parts = [
        f"group={get_algebra(cfg.group).name}",
        f"flow={cfg.flow}",
        f"method={cfg.method}",
        f"seed={cfg.seed}",
        f"max_membership_residual={fmt(traj.max_residual)}",
        f"reprojections={traj.reprojections}",
        f"end_to_start={fmt(float(np.abs(last - first).max()))}",
    ]
    verdict = analyze_derivation(X).verdict
    if verdict.kind == PERIODIC:
        parts.append(f"spectral_period={fmt(verdict.period)}")
        res = detect_period(X, cfg.flow, g, cfg.horizon, tol=cfg.tol)
        parts.append(f"measured_period={fmt(res.period) if res.period is not None else res.kind}")
    else:
        parts.append(f"verdict={verdict.kind}")
    print("summary: " + " ".join(parts), file=sys.stderr)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    scfg = SuiteConfig(
        group=get_algebra(cfg.group).name,
        seed=cfg.seed,
        trials=cfg.trials,
        x=cfg.coefficients,
        horizon=cfg.horizon,
        samples=cfg.samples,
        tol=cfg.tol,
    )
    if cfg.coefficients is not None:
        _element(cfg)
    reports = run_suites(cfg.suite, scfg)
    ok = all(r.passed for r in reports)
    doc = {
        "group": scfg.group,
        "suite": cfg.suite,
        "seed": cfg.seed,
        "rng": XorShift64Star.name,
        "pass": ok,
        "reports": [r.to_dict(timings=cfg.timings) for r in reports],
    }
    if cfg.fmt == "csv":
        rows = [[r.claim, r.group, r.trials, r.max_deviation, r.tolerance, str(r.passed).lower()] for r in reports]
        _emit(csv_text(["claim", "group", "trials", "max_deviation", "tolerance", "pass"], rows), cfg)
    else:
        _emit(dumps(doc), cfg)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.claim} max_deviation={fmt(r.max_deviation)}", file=sys.stderr)
    return 0 if ok else 1


def parse_grid(text: str | None) -> list[np.ndarray]:
    """``LO:HI:N`` for all of b, c, d, e, or four such specs separated by commas."""
    if text is None:
        text = "-1:1:3"
    specs = text.split(",")
    if len(specs) == 1:
        specs = specs * 4
    if len(specs) != 4:
        raise UsageError("--grid takes one LO:HI:N spec or four (for b, c, d, e)")
    axes = []
    for s in specs:
        try:
            lo, hi, n = s.split(":")
            lo, hi, n = float(lo), float(hi), int(n)
        except ValueError:
            raise UsageError(f"bad grid spec {s!r}; expected LO:HI:N") from None
        if n < 1:
            raise UsageError("grid axes need at least one point")
        axes.append(np.linspace(lo, hi, n) if n > 1 else np.array([lo]))
    return axes


def cmd_sweep(cfg: RunConfig) -> int:
    alg = get_algebra(cfg.group)
    if alg.name != "so4":
        raise UsageError("sweep is defined on so4 only")
    axes = parse_grid(cfg.grid)
    total = math.prod(len(ax) for ax in axes)
    if total > MAX_SWEEP_POINTS:
        raise UsageError(f"grid has {total} points, more than {MAX_SWEEP_POINTS}")
    header = ["a", "b", "c", "d", "e", "f", "bc_minus_ed", "verdict", "period", "bc_ed_criterion"]
    rows = []
    for b, c, d, e in itertools.product(*axes):
        coeffs = (cfg.a, float(b), float(c), float(d), float(e), cfg.f)
        if not any(coeffs):
            print("warning: all-zero point excluded (X = 0 fixes every point)", file=sys.stderr)
            rows.append(list(coeffs) + [0.0, "excluded-all-zero", "", ""])
            continue
        rep = analyze_derivation(alg.element(coeffs))
        v = rep.verdict
        crit = so4_periodicity_criterion(*coeffs)
        rows.append(
            list(coeffs)
            + [float(rep.extra["bc_minus_ed"]) + 0.0, v.kind, "" if v.period is None else float(v.period),
               PERIODIC if crit.periodic else NON_PERIODIC]
        )
    _emit(csv_text(header, rows), cfg)
    return 0


COMMANDS = {"classify": cmd_classify, "simulate": cmd_simulate, "verify": cmd_verify, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--group", default="so3", help="so3, su2, so4 ... so8")
    common.add_argument("--x", help="comma-separated coefficients in the registered basis order")
    common.add_argument("--flow", choices=("linear", "invariant"), default="linear")
    common.add_argument("--horizon", type=float)
    common.add_argument("--samples", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", dest="fmt", choices=("json", "csv"))
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--method", choices=METHODS, default="generic-exp")
    common.add_argument("--timings", action="store_true", help="include runtime_ms in reports")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="lieflow", description="Linear and invariant flows on compact Lie groups.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("classify", parents=[common], help="spectral verdict for ad(X)")
    sp = sub.add_parser("simulate", parents=[common], help="trajectory CSV")
    sp.add_argument("--start", choices=("random", "identity"), default="random")
    vp = sub.add_parser("verify", parents=[common], help="run verification suites")
    vp.add_argument(
        "--suite", default="all", help="comma-separated list from: " + ", ".join(SUITE_NAMES + ("all",))
    )
    vp.add_argument("--trials", type=int)
    wp = sub.add_parser("sweep", parents=[common], help="so4 verdict grid over (b, c, d, e)")
    wp.add_argument("--grid", help="LO:HI:N, or four comma-separated specs for b, c, d, e")
    wp.add_argument("--a", type=float, default=0.0)
    wp.add_argument("--f", type=float, default=0.0)
    return p


def _config(ns: argparse.Namespace) -> RunConfig:
    default_fmt = "csv" if ns.command in ("simulate", "sweep") else "json"
    return RunConfig(
        command=ns.command,
        group=ns.group,
        coefficients=parse_coefficients(ns.x),
        flow=ns.flow,
        horizon=ns.horizon,
        samples=ns.samples,
        tol=ns.tol,
        seed=ns.seed,
        suite=getattr(ns, "suite", "all"),
        fmt=ns.fmt or default_fmt,
        out=ns.out,
        method=ns.method,
        trials=getattr(ns, "trials", None),
        grid=getattr(ns, "grid", None),
        a=getattr(ns, "a", 0.0),
        f=getattr(ns, "f", 0.0),
        start=getattr(ns, "start", "random"),
        timings=ns.timings,
    )


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _config(ns)
        if cfg.tol is not None and not cfg.tol > 0:
            raise UsageError("--tol must be positive")
        if cfg.trials is not None and cfg.trials < 0:
            raise UsageError("--trials must be non-negative")
        thread_count()  # reject a malformed LIEFLOW_THREADS before any work
        return COMMANDS[cfg.command](cfg)
    except (UsageError, UnknownSuite, LieFlowError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
