#!/usr/bin/env python3
"""Run every scenario config in configs/ and summarize the emitted checks.

Each config is executed into its own subdirectory of --out.  The script exits
nonzero if any run fails its internal consistency checks, making it usable as
a smoke test for the whole pipeline.
"""

from __future__ import annotations

import argparse
import pathlib
import sys

from nonlocal_sis import load_config, run


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--configs", default=None,
                        help="directory of *.json scenario configs "
                             "(default: configs/ next to this script)")
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)

    if args.configs is None:
        config_dir = pathlib.Path(__file__).resolve().parent.parent / "configs"
    else:
        config_dir = pathlib.Path(args.configs)
    paths = sorted(config_dir.glob("*.json"))
    if not paths:
        print(f"no configs found in {config_dir}", file=sys.stderr)
        return 2

    all_ok = True
    for path in paths:
        cfg = load_config(str(path))
        out_dir = pathlib.Path(args.out) / path.stem
        record = run(cfg, str(out_dir))
        status = "ok" if record.ok else "FAILED"
        print(f"{path.stem}: {status} ({record.seconds:.2f}s, "
              f"{len(record.outputs)} artifacts)")
        for name, ok in sorted(record.checks.items()):
            print(f"  check {name}: {'pass' if ok else 'FAIL'}")
        all_ok = all_ok and record.ok
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
