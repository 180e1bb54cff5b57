"""Lower bound, quasi-pure value and roof estimate along a white-noise path.

Writes a wide CSV (one row per visibility) suitable for external plotting.

Usage: python scripts/noise_scan.py ghz --n 3 --spec C3 --points 21 --out ghz3.csv
"""

import argparse
import csv
import sys

import numpy as np

from mconc.cli import RunConfig, cmd_scan


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("family", choices=["bell", "ghz", "w"])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--spec", default="CN")
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--roof-restarts", type=int, default=4)
    p.add_argument("--no-roof", action="store_true")
    p.add_argument("--out", type=argparse.FileType("w"), default=sys.stdout)
    args = p.parse_args(argv)

    grid = np.linspace(0, 1, args.points)
    cfg = RunConfig(
        seed=args.seed,
        restarts=args.restarts,
        roof=None if args.no_roof else 0,
        roof_restarts=args.roof_restarts,
        quasi_pure=True,
    )
    rep = cmd_scan(args.family, args.n, args.spec, grid, cfg)
    table = {}
    for row in rep.rows:
        label, quantity = row["quantity"].rsplit(".", 1)
        table.setdefault(label, {})[quantity] = row["value"]

    writer = csv.writer(args.out, lineterminator="\n")
    writer.writerow(["visibility", "lower_bound", "quasi_pure", "roof_upper"])
    for v, label in zip(grid, table):
        cells = table[label]
        writer.writerow([f"{v:.6f}"] + [f"{cells.get(k, float('nan')):.12f}" for k in ("lower_bound", "quasi_pure", "roof_upper")])
    for note in rep.notes:
        print(note, file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
