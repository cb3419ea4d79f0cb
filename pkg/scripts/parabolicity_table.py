"""Verdict table for Euclidean ends: PHyperbolic exactly when p < n."""
import argparse
import csv
import sys

from pendkit.model_geometry import ModelManifold
from pendkit.radial_potential import classify_end


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=6)
    args = ap.parse_args()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "p", "verdict", "tail_integral", "expected"])
    for n in range(2, args.n_max + 1):
        for p in sorted({1.5, 2.0, 3.0, n - 0.5, float(n), n + 1.0}):
            res = classify_end(ModelManifold.euclidean(n), p)
            expected = "PHyperbolic" if p < n else "PParabolic"
            w.writerow([n, p, res.verdict, res.tail_integral, expected])


if __name__ == "__main__":
    main()
