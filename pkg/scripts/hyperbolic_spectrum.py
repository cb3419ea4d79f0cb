"""Ball eigenvalues lam(B_R) of H^m for p = 2 and their exhaustion limit.

For m = 3 the ball values have the closed form 1 + (pi/R)^2, printed
alongside as a check.
"""
import argparse
import math

from pendkit.model_geometry import ModelManifold
from pendkit.spectrum import lambda_manifold


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--m", type=int, nargs="+", default=[2, 3, 4])
    args = ap.parse_args()
    print("m,R,lambda,exact_ball_h3,limit,target")
    for m in args.m:
        rep = lambda_manifold(ModelManifold.hyperbolic(m), args.p)
        target = ((m - 1) / args.p) ** args.p
        for R, lam in rep.lambda_balls:
            exact = 1 + (math.pi / R) ** 2 if (m == 3 and args.p == 2) else float("nan")
            print(f"{m},{R},{lam:.10g},{exact:.10g},{rep.lambda_limit:.10g},{target:.10g}")


if __name__ == "__main__":
    main()
