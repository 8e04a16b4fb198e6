"""Command line front end: ``ltlab run <config>``, ``ltlab print-defaults``, ``ltlab selftest``.

Exit codes: 0 success, 1 usage or configuration error, 2 selftest failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import HELP, ConfigError, default_config, parse_config, render_config
from .experiments import ExperimentError, default_threads, run_experiment
from .report import format_summary, rows_to_csv, rows_to_json, summarize
from .selftest import run_selftest


def _defaults_epilog() -> str:
    cfg = default_config()
    lines = ["config keys (key = value; defaults shown):"]
    for line in render_config(cfg).splitlines():
        key = line.split(" = ", 1)[0]
        lines.append(f"  {line:<60} {HELP[key]}")
    lines.append("environment: LTLAB_THREADS is used when --threads is not given")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ltlab",
        description="Local-time laboratory: occupation-time formula experiments.",
        epilog=_defaults_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config", type=Path)
    run.add_argument("--threads", type=int, default=None, help="worker threads (default: LTLAB_THREADS or CPU count)")
    run.add_argument("--output", default=None, help="override the config's output target")
    run.add_argument("--format", choices=("csv", "json"), default=None, help="override the config's output format")
    run.add_argument("--quiet", action="store_true", help="do not print the summary table")
    sub.add_parser("print-defaults", help="print a fully populated default config")
    sub.add_parser("selftest", help="run the exact-identity and conservation checks")
    return parser


def _cmd_run(args) -> int:
    try:
        cfg = parse_config(args.config.read_text())
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return 1
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 1
    threads = args.threads or default_threads()
    try:
        rows = run_experiment(cfg, threads=threads)
    except ExperimentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    fmt = args.format or cfg.format
    target = args.output or cfg.output
    summary = summarize(rows, level=cfg.level)
    text = rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows, summary)
    if target == "-":
        sys.stdout.write(text)
        info = sys.stderr
    else:
        Path(target).write_text(text)
        info = sys.stdout
    if not args.quiet:
        print(format_summary(summary), file=info)
    return 0


def _cmd_selftest() -> int:
    results = run_selftest()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return 0 if all(ok for _, ok, _ in results) else 2


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "print-defaults":
        sys.stdout.write(render_config(default_config(), comments=True))
        return 0
    return _cmd_selftest()


if __name__ == "__main__":
    sys.exit(main())
