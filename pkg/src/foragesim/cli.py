"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 suite assertion failure.
A blow-up verdict is a normal outcome of ``run`` and exits 0.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness
from .config import ConfigError, RunConfig
from .kernels import BACKEND

EXIT_OK, EXIT_CONFIG, EXIT_SUITE = 0, 2, 3


def _values(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values: {exc}") from exc


def cmd_run(args) -> int:
    cfg = RunConfig.load(args.config)
    rec = harness.run(cfg, args.out)
    sys.stdout.write(rec.report())
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = RunConfig.load(args.config)
    result = harness.sweep(cfg, args.axis, _values(args.values), workers=args.workers, out_dir=args.out)
    sys.stdout.write(result.summary())
    return EXIT_OK


def cmd_suite(args) -> int:
    if args.name not in harness.SUITES:
        print(f"unknown suite {args.name!r}; choose from {', '.join(harness.SUITES)}", file=sys.stderr)
        return EXIT_CONFIG
    report = harness.scenario_suite(args.name, args.out)
    sys.stdout.write(report.text())
    return EXIT_OK if report.passed else EXIT_SUITE


def cmd_calibrate(args) -> int:
    cfg = RunConfig.load(args.config)
    try:
        result = harness.calibrate_kappa(cfg, args.lo, args.hi, args.iterations)
    except harness.CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_SUITE
    sys.stdout.write(result.summary())
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = RunConfig.load(args.config)
    q, small, damping = harness.regime_summary(cfg)
    for k, v in q.as_dict().items():
        print(f"{k} = {v!r}")
    print(f"taxis_smallness.chi_bound = {small.chi_bound!r}")
    print(f"taxis_smallness.xi_bound = {small.xi_bound!r}")
    print(f"taxis_smallness.holds = {small.holds}")
    print(f"damping_exponents.holds = {damping}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="foragesim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=f"%(prog)s (kernel: {BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one configuration")
    p.add_argument("config", type=Path)
    p.add_argument("--out", type=Path, help="run directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a one-parameter sweep")
    p.add_argument("config", type=Path)
    p.add_argument("--axis", required=True, help="parameter path, e.g. params.xi")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("suite", help="run a scripted scenario suite")
    p.add_argument("name", help=", ".join(harness.SUITES))
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("calibrate-kappa", help="bisect the smallness constant")
    p.add_argument("config", type=Path)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--iterations", type=int, default=6)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("check-conditions", help="print regime constants and condition checks")
    p.add_argument("config", type=Path)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
