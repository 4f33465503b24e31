"""Run every registered scenario and write one JSON report per scenario.

    python3 scripts/run_all_scenarios.py --out reports/ [--parallel 4] [--seed N]
"""
from __future__ import annotations

import argparse
import sys

from cmhilbert.cli import main as cli_main
from cmhilbert.report import DEFAULT_SEED


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="reports")
    ap.add_argument("--parallel", type=int, default=1)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--config")
    args = ap.parse_args()
    argv = ["run", "--scenario", "all", "--out", args.out, "--parallel", str(args.parallel), "--seed", str(args.seed)]
    if args.config:
        argv += ["--config", args.config]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
