"""Probe Sobolev constants over the built-in models and report any run with
a finite constant on a parabolic end of infinite volume (there should be none)."""
import argparse

from pendkit.dichotomy import builtin_suite, dichotomy_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--family-size", type=int, default=24)
    args = ap.parse_args()
    rows = dichotomy_sweep(builtin_suite(), seed=args.seed, family_size=args.family_size)
    print("model,p,q,C,end,volume_finite,violation")
    for label, p, q, C, end, vol, bad in rows:
        print(f"{label},{p},{q},{C:.6g},{end},{vol},{bad}")
    n_bad = sum(r[-1] for r in rows)
    print(f"# {len(rows)} runs, {n_bad} violations")
    return 1 if n_bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
