"""Lower bound, estimate and upper bound of the bottom of the p-spectrum
for the complex and quaternionic hyperbolic models."""
import argparse
import csv
import sys

from pendkit.cli import emit_cheng_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--p", type=float, nargs="+", default=[1.5, 2.0, 3.0])
    args = ap.parse_args()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["family", "m", "p", "lower", "estimate", "upper", "pass"])
    for row in emit_cheng_table(args.p, args.m):
        w.writerow(row)


if __name__ == "__main__":
    main()
