"""Write the difference-quotient and heat-norm series as CSV and print fitted slopes.

The difference-quotient residual should fall like h (log-log slope 1) for every
coordinate; the heat norm should never increase.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

from cmhilbert.report import run_scenario, write_series


def _slope(pts):
    (h0, r0), (h1, r1) = pts[0], pts[-1]
    return math.log(r1 / r0) / math.log(h1 / h0)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="series")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    dq = run_scenario("difference-quotient-rate")
    write_series(dq, out / "difference_quotient.csv")
    by_label: dict[str, list[tuple[float, float]]] = {}
    for x, y, label in dq.series:
        by_label.setdefault(label, []).append((x, y))
    for label, pts in sorted(by_label.items()):
        print(f"{label}: log-log slope {_slope(pts):.4f}")

    heat = run_scenario("heat-contraction")
    path = out / "heat_norm.csv"
    write_series(heat, path)
    norms = [float(r[1]) for r in list(csv.reader(path.open()))[1:] if r[2] == "norm"]
    print(f"heat norm: {norms[0]:.6f} -> {norms[-1]:.6f}, monotone={all(b <= a for a, b in zip(norms, norms[1:]))}")
    return 0 if dq.passed and heat.passed else 1


if __name__ == "__main__":
    sys.exit(main())
