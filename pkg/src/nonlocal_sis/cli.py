"""Command-line entry point: run one scenario config or the acceptance suite."""

from __future__ import annotations

import argparse
import sys

from .errors import ModelError
from .runner import RunRecord, load_config, run, theorem_suite


def _print_record(record: RunRecord) -> None:
    for path in record.outputs:
        print(path)
    for name, ok in record.checks.items():
        print(f"check {name}: {'pass' if ok else 'FAIL'}")
    print(f"finished in {record.seconds:.2f} s: {'ok' if record.ok else 'FAILED'}")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="nonlocal-sis",
        description="Spectral thresholds, equilibria, and simulations for a "
                    "two-compartment epidemic model with integral dispersal.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="execute one scenario config")
    run_p.add_argument("--config", required=True, help="path to a scenario JSON file")
    run_p.add_argument("--out", required=True, help="output directory for artifacts")
    suite_p = sub.add_parser("suite", help="run the full acceptance battery")
    suite_p.add_argument("--out", required=True, help="output directory for the pass/fail table")
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            record = run(load_config(args.config), args.out)
        else:
            record = theorem_suite(args.out)
    except (ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _print_record(record)
    return 0 if record.ok else 1


if __name__ == "__main__":
    sys.exit(main())
