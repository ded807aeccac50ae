"""Locate the largest c at which a (1,1) crease turns the functional negative
for the distinguished ansatz solution, and tabulate the minimum over a.

    python3 scripts/crease_threshold.py --genus 3 --p1 1 --p2 2 --out crease_threshold.csv
"""

import argparse
import csv
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from toric_extremal.cp2bundle import CP2BundleParams, crease_F


def crease_min(genus: int, p1: int, p2: int, c: float, samples: int = 400):
    P = CP2BundleParams.from_genus(genus, p1, p2, Fraction(c))
    f = lambda a: float(crease_F(P, Fraction(a)))
    grid = np.linspace(0, 1, samples + 1)[1:-1]
    vals = [f(a) for a in grid]
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return (res.x, res.fun) if res.fun < vals[k] else (grid[k], vals[k])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--genus", type=int, default=3)
    ap.add_argument("--p1", type=int, default=1)
    ap.add_argument("--p2", type=int, default=2)
    ap.add_argument("--out", default="crease_threshold.csv")
    args = ap.parse_args()

    rows = []
    for c in np.geomspace(1e-4, 1e-1, 31):
        a, v = crease_min(args.genus, args.p1, args.p2, c)
        rows.append((c, a, v))
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["c", "argmin_a", "min_value"])
        w.writerows(rows)

    neg = [c for c, _, v in rows if v < 0]
    pos = [c for c, _, v in rows if v >= 0]
    if neg and pos and max(neg) < min(pos):
        g = lambda c: crease_min(args.genus, args.p1, args.p2, c)[1]
        c_star = brentq(g, max(neg), min(pos), xtol=1e-12)
        print(f"threshold c* = {c_star:.7f} (negative crease values for c < c*)")
    else:
        print("no sign change on the c grid")
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
