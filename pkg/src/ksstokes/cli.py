"""Command line: ``run``, ``preset``, ``verify`` and ``rates``.

Exit codes: 0 pass, 1 invariant (or rate/oracle) failure, 2 solver or config error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .diagnostics import DiagnosticsRecord, check_invariants, fit_rate
from .exceptions import KSStokesError
from .scenario_io import PRESET_NAMES, parse_config, preset_config, read_csv, run
from .scenario_io.runner import EXIT_ERROR, EXIT_INVARIANT, EXIT_PASS
from .validation import parse_window

logger = logging.getLogger("ksstokes")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="dotted config override, e.g. control.dt=0.005 (repeatable)")
    p.add_argument("--csv", help="diagnostics CSV path (overrides output.csv)")
    p.add_argument("--checkpoint", help="snapshot written at the end or on error")
    p.add_argument("--restart", help="resume from this snapshot, appending to the CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ksstokes", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a YAML scenario file")
    p.add_argument("config", type=Path)
    _add_output_args(p)

    p = sub.add_parser("preset", help="run a named preset")
    p.add_argument("name", choices=PRESET_NAMES)
    _add_output_args(p)

    p = sub.add_parser("verify", help="re-check the invariants of a diagnostics CSV")
    p.add_argument("csv", type=Path)

    p = sub.add_parser("rates", help="fit an exponential decay rate from a diagnostics CSV")
    p.add_argument("csv", type=Path)
    p.add_argument("--window", required=True, help="t0:t1")
    p.add_argument("--column", default="linf_m", choices=DiagnosticsRecord.field_names()[1:],
                   help="series to fit (default linf_m)")
    return parser


def _run(cfg, args) -> int:
    if args.restart:
        cfg.restart_from = args.restart
    summary = run(cfg, csv_path=args.csv, checkpoint_path=args.checkpoint)
    for line in summary.lines():
        print(line)
    return summary.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _run(parse_config(args.config.read_text(), args.override), args)
        if args.command == "preset":
            return _run(preset_config(args.name, args.override), args)
        history = read_csv(args.csv)
        if args.command == "verify":
            report = check_invariants(history)
            for line in report.lines():
                print(line)
            return EXIT_PASS if report.passed else EXIT_INVARIANT
        window = parse_window(args.window)
        fit = fit_rate([(r.t, getattr(r, args.column)) for r in history], window)
        print(f"rate {args.column} = {fit.rate!r} over [{window[0]}, {window[1]}] "
              f"n={fit.n_samples} R^2={fit.r_squared:.6f} amplitude={fit.amplitude!r}")
        return EXIT_PASS
    except (KSStokesError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
