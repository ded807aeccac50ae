"""Sweep genus and c and record the sampled positivity margin of the
distinguished ansatz solution on every face of the simplex.

    python3 scripts/positivity_sweep.py --resolution 60 --out positivity.csv
"""

import argparse
import csv
from fractions import Fraction

from toric_extremal.abreu import face_positivity
from toric_extremal.cp2bundle import CP2BundleParams, ansatz_H, distinguished_solution
from toric_extremal.polytope import standard_simplex

C_VALUES = ["1/1000", "1/100", "1/10", "1/4", "1", "4", "16", "100", "1000"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--genera", default="0,1,2,3,5")
    ap.add_argument("--p1", type=int, default=1)
    ap.add_argument("--p2", type=int, default=2)
    ap.add_argument("--resolution", type=int, default=60)
    ap.add_argument("--out", default="positivity.csv")
    args = ap.parse_args()

    S = standard_simplex(2)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["genus", "c", "min_eigenvalue", "interior_min", "positive", "first_negative"])
        for genus in map(int, args.genera.split(",")):
            for c in C_VALUES:
                P = CP2BundleParams.from_genus(genus, args.p1, args.p2, Fraction(c))
                rep = face_positivity(ansatz_H(distinguished_solution(P), P), S, args.resolution)
                interior = next(f for f in rep.faces if f.dim == 2)
                bad = None if rep.first_negative is None else list(map(float, rep.first_negative))
                w.writerow([genus, c, rep.min_eigenvalue, interior.min_eigenvalue, rep.positive, bad])
                print(f"g={genus} c={c:>6}: positive={rep.positive} interior min={interior.min_eigenvalue:.4g}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
