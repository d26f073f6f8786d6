"""Command line: ``intervalzeta <command> --config PATH [options]``.

Exit codes: 0 success (or verify with a match / no testable pairs), 1 verify
mismatch, 2 invalid configuration or map, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, FORMATS, config_from_document, load_config
from .pipeline import STAGES, PipelineError, run_pipeline
from .presets import PRESET_NAMES, preset_document
from .report import ReportIOError, emit_report

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intervalzeta",
        description="Periodic-orbit zeta functions and transfer operators of piecewise monotone interval maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES:
        p = sub.add_parser(name, help=f"run the pipeline up to '{name}'")
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", metavar="PATH", help="JSON run configuration")
        src.add_argument("--preset", choices=PRESET_NAMES, help="shipped example configuration")
        p.add_argument("--order", type=int, help="truncation order M (4..20)")
        p.add_argument("--ulam-bins", type=int, help="Ulam bins n (power of two, 16..8192)")
        p.add_argument("--margin", type=float, help="eigenvalue margin above theta")
        p.add_argument("--output", metavar="DIR", help="write report files here (default: stdout)")
        p.add_argument("--format", choices=FORMATS, default="json")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            try:
                cfg = load_config(args.config)
            except OSError as exc:
                print(f"error: cannot read config: {exc}", file=sys.stderr)
                return EXIT_IO
        else:
            cfg = config_from_document(preset_document(args.preset))
        cfg = cfg.with_overrides(args.order, args.ulam_bins, args.margin, args.output, args.format)
        report = run_pipeline(cfg, args.command)
    except (ConfigError, PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        paths = emit_report(report, cfg.fmt, cfg.output, sys.stdout)
    except ReportIOError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in paths:
        print(path, file=sys.stderr)
    if report.match is not None:
        print(f"bk_crosscheck: {report.match.verdict}", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
