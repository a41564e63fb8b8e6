"""Command-line front end.

Commands::

    duopolytax simulate   --config CFG [--out trajectory.csv] [--mode coupled|decoupled]
    duopolytax compromise --config CFG [--grid N] [--mode M] [--no-state] [--out sweep.csv]
    duopolytax sweep      --config CFG --param x --from A --to B --steps N [--out sweep.csv]
    duopolytax analyze-lv --config CFG [--out trajectory.csv]

Every command prints a JSON run report to stdout (or ``--report PATH``).

Exit codes: 0 ok, 2 validation error, 3 integration failure, 4 analysis
failure (no oscillation return found), 5 config file missing or unreadable,
6 config file not valid JSON, 64 bad command-line usage.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .compromise import compromise_point
from .config import apply_overrides, scenario_from_config, scenario_to_config
from .income import MODES, sweep, write_sweep_csv
from .lotka_volterra import PeriodDetectionError, analyze
from .model import SystemKind, ValidationError
from .ode import IntegrationError, format_float, integrate, write_csv

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INTEGRATION = 3
EXIT_ANALYSIS = 4
EXIT_MISSING_FILE = 5
EXIT_PARSE = 6
EXIT_USAGE = 64


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_config(path: str, overrides: List[str]) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_MISSING_FILE, f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise CliError(EXIT_PARSE, f"config {path} must hold a JSON object")
    return apply_overrides(data, overrides or [])


def _scenario(args):
    data = _load_config(args.config, args.set)
    if getattr(args, "mode", None) == "decoupled" and args.command == "simulate":
        data["decoupled"] = True
    return scenario_from_config(data)


def _simulate(args, scenario) -> dict:
    traj = integrate(scenario)
    write_csv(traj, args.out)
    return {
        "trajectory_path": str(args.out),
        "mode": traj.mode,
        "samples": int(len(traj.t)),
        "steps": traj.steps,
        "final_state": [float(traj.v1[-1]), float(traj.v2[-1])],
        "events": [{"t": float(t), "kind": kind} for t, kind in traj.events],
    }


def _compromise(args, scenario) -> dict:
    result = compromise_point(scenario, grid_size=args.grid, mode=args.mode,
                              include_state=not args.no_state,
                              c3_convention=args.c3, workers=args.workers)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "h1", "h2", "h3", "maxdev"])
        for r, m in zip(result.grid_reports, result.grid_max_deviation):
            writer.writerow([format_float(v) for v in (r.x, r.h1, r.h2, r.h3, m)])
    out = result.as_dict()
    out["sweep_path"] = str(args.out)
    return out


def _sweep(args, scenario) -> dict:
    if args.param != "x":
        raise ValidationError(f"unsupported sweep parameter {args.param!r}; only x")
    if args.steps < 1:
        raise ValidationError("steps must be at least 1")
    a, b = args.from_, args.to
    if not 0.0 <= a < 1.0:
        raise ValidationError("invalid range: x out of [0,1)")
    if args.steps > 1 and not a < b < 1.0:
        raise ValidationError("invalid range: need from < to < 1")
    xs = [a] if args.steps == 1 else list(np.linspace(a, b, args.steps))
    reports = sweep(scenario, xs, args.mode, workers=args.workers)
    write_sweep_csv(reports, args.out)
    return {"sweep_path": str(args.out), "mode": MODES[args.mode], "rows": len(reports)}


def _analyze_lv(args, scenario) -> dict:
    if scenario.system is not SystemKind.LOTKA_VOLTERRA:
        raise ValidationError("analyze-lv needs system lotka_volterra")
    traj = integrate(scenario)
    if args.out:
        write_csv(traj, args.out)
    try:
        result = analyze(scenario, traj)
    except PeriodDetectionError as exc:
        raise CliError(EXIT_ANALYSIS, f"{exc}: extend the horizon, e.g. --set horizon=<longer>") from exc
    return {
        "equilibrium": list(result.equilibrium),
        "first_integral": result.x_invariant,
        "first_integral_drift": result.invariant_drift,
        "period": "at equilibrium" if result.at_equilibrium else result.period,
        "averages": list(result.averages),
        "trajectory_path": str(args.out) if args.out else None,
    }


COMMANDS = {
    "simulate": _simulate,
    "compromise": _compromise,
    "sweep": _sweep,
    "analyze-lv": _analyze_lv,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="duopolytax", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out_default, mode_default):
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--out", default=out_default, help="CSV output path")
        p.add_argument("--report", default=None, help="write the JSON report here instead of stdout")
        p.add_argument("--mode", choices=sorted(MODES), default=mode_default)
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry by dotted path")
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("simulate", help="integrate the scenario and write t,V1,V2")
    common(p, "trajectory.csv", "coupled")

    p = sub.add_parser("compromise", help="minimax compromise tax rate")
    common(p, "compromise.csv", "decoupled")
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--no-state", action="store_true", help="compare the two firms only")
    p.add_argument("--c3", choices=["empirical", "last_rate"], default="empirical",
                   help="state maximum: grid maximum or value at the largest rate")

    p = sub.add_parser("sweep", help="incomes over a range of tax rates")
    common(p, "sweep.csv", "decoupled")
    p.add_argument("--param", default="x")
    p.add_argument("--from", dest="from_", type=float, required=True)
    p.add_argument("--to", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)

    p = sub.add_parser("analyze-lv", help="equilibrium, invariant, period and averages")
    common(p, None, "coupled")
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        scenario = _scenario(args)
        results = COMMANDS[args.command](args, scenario)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except IntegrationError as exc:
        print(f"integration error: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    report = {
        "tool": "duopolytax",
        "version": __version__,
        "command": {"name": args.command, "argv": argv},
        "scenario": scenario_to_config(scenario),
        "results": results,
        "wall_time_s": time.perf_counter() - started,
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
