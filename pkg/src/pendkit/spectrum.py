"""Bottom of the p-spectrum of model manifolds and the bounds around it.

* ``lambda_ball`` / ``lambda_manifold``: first Dirichlet p-eigenvalue of
  balls and its exhaustion limit.
* ``divergence_lower_bound``: (inf delta_r / p)^p from the field X = grad r.
* ``cheng_upper_bound``: (a / p)^p from the exponential volume growth rate a.
* ``buckley_koskela_gap``: a - p lam^(1/p), nonnegative whenever the volume
  grows at least like exp(p lam^(1/p) r).
* ``poli_decay``: r^-p V(2r) / V(r), the Rayleigh quotient of the linear
  cutoff, which drives lam to 0 under polynomial growth.
"""
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .discrete_solver import build_grid, p_rayleigh_minimize
from .errors import BoundInapplicableError, NumericInconsistencyError, ParameterError
from .model_geometry import Kind, delta_r, growth_profile, log_volume

BALL_GRID = 2049
SHARPNESS_RTOL = 0.05
DEFAULT_R_MAX = 40.0


def lambda_ball(model, p, R, size=BALL_GRID):
    if not p > 1:
        raise ParameterError("p must be > 1")
    if not R > model.r_min:
        raise ParameterError("need R > r_min")
    return p_rayleigh_minimize(model, p, build_grid(model.r_min, R, size, 1.0))


def _lambda_ball_refined(model, p, R, size):
    """Richardson in the mesh width: the discrete eigenvalue is O(h^2)."""
    coarse = lambda_ball(model, p, R, size).lam
    fine = lambda_ball(model, p, R, 2 * size - 1).lam
    return (4.0 * fine - coarse) / 3.0


def extrapolate_limit(R, lam):
    """Fit lam(R) = L + c R^-s through the last three points.

    Returns (L, error bar).  Falls back to the last value, with the last
    decrement as error bar, if the decrements are not positive and shrinking
    like a power of R.
    """
    R = np.asarray(R, dtype=float)[-3:]
    lam = np.asarray(lam, dtype=float)[-3:]
    d1, d2 = lam[0] - lam[1], lam[1] - lam[2]
    fallback = (float(lam[-1]), float(abs(d2)))
    if not (d1 > 0 and d2 > 0 and d2 < d1):
        return fallback

    def mismatch(s):
        x = R**-s
        return (x[0] - x[1]) / (x[1] - x[2]) - d1 / d2

    try:
        s = brentq(mismatch, 0.05, 20.0)
    except ValueError:
        return fallback
    x = R**-s
    c = d2 / (x[1] - x[2])
    limit = float(lam[2] - c * x[2])
    limit = max(limit, 0.0)
    return limit, float(abs(lam[2] - limit))


@dataclass
class SpectrumReport:
    model: str
    p: float
    lambda_balls: list = field(default_factory=list)  # (R, lam(B_R))
    lambda_limit: float = float("nan")
    limit_error: float = float("nan")
    lower_bound: float = float("nan")
    upper_bound: float = float("nan")
    bk_gap: float = float("nan")
    regime: str = ""
    consistent: bool = False

    def rows(self):
        for R, lam in self.lambda_balls:
            yield [self.model, self.p, R, lam, self.lower_bound, self.upper_bound, self.bk_gap]
        yield [self.model, self.p, "inf", self.lambda_limit, self.lower_bound, self.upper_bound, self.bk_gap]

    def to_csv(self, fh=None):
        out = fh or io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["model", "p", "R", "lambda", "lower", "upper", "gap"])
        for row in self.rows():
            w.writerow([_fmt(v) for v in row])
        return out.getvalue() if fh is None else None


def _fmt(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def lambda_manifold(model, p, R_list=(10.0, 20.0, 40.0), size=BALL_GRID, r_max=DEFAULT_R_MAX,
                    refine=True):
    """Exhaustion limit of lam(B_R) with bounds and the growth gap filled in."""
    R_list = [float(R) for R in R_list]
    if len(R_list) < 3 or np.any(np.diff(R_list) <= 0):
        raise ParameterError("R_list must be increasing with at least 3 radii")
    if refine:
        lams = [_lambda_ball_refined(model, p, R, size) for R in R_list]
    else:
        lams = [lambda_ball(model, p, R, size).lam for R in R_list]
    for (Ra, la), (Rb, lb) in zip(zip(R_list, lams), zip(R_list[1:], lams[1:])):
        if lb > la * (1 + 1e-9) + 1e-12:
            raise NumericInconsistencyError(
                f"lam(B_{Rb:g}) = {lb} exceeds lam(B_{Ra:g}) = {la}: domain monotonicity violated"
            )
    limit, err = extrapolate_limit(R_list, lams)
    rep = SpectrumReport(model.label, p, list(zip(R_list, lams)), limit, err)
    rep.lower_bound = bottom_lower_bound(model, p, R_list[-1])
    prof = growth_profile(model, max(r_max, model.r_min + 10))
    rep.regime = prof.regime
    rep.upper_bound = (prof.a / p) ** p if prof.regime == "exponential" else 0.0
    if prof.regime == "exponential":
        rep.bk_gap = prof.a - p * limit ** (1.0 / p)
    tol = SHARPNESS_RTOL * max(rep.upper_bound, rep.lower_bound, limit) + 1e-3
    rep.consistent = bool(
        rep.lower_bound <= limit + tol
        and limit <= rep.upper_bound + tol
        and (math.isnan(rep.bk_gap) or rep.bk_gap >= -tol)
    )
    return rep


def divergence_lower_bound(model, p, r0, R, n_samples=4096):
    """(inf_{[r0, R]} delta_r)^p / p^p, a lower bound for lam_{1,p}(B_R)."""
    if not p > 1:
        raise ParameterError("p must be > 1")
    if not r0 < R:
        raise ParameterError("need r0 < R")
    lo = r0
    if model.kind is Kind.CUSTOM:
        h = 1e-5 * max(1.0, R)
        lo = max(r0, model.r_samples[0] + 1e-5 * max(1.0, r0) * 1.01)
        R = min(R, model.r_samples[-1] - h * 1.01)
    rs = np.linspace(lo, R, n_samples)
    vals = np.array([delta_r(model, r) for r in rs if r > 0])
    inf_dr = float(vals.min())
    if model.kind is not Kind.CUSTOM:
        inf_dr = min(inf_dr, delta_r(model, R))  # built-ins: delta_r decreasing
    if not inf_dr > 0:
        raise BoundInapplicableError(f"inf delta_r = {inf_dr} <= 0 on [{r0}, {R}]")
    return (inf_dr / p) ** p


def bottom_lower_bound(model, p, R=DEFAULT_R_MAX):
    """Lower bound for lam_{1,p}(M): the R -> inf limit when known, else at R."""
    a = model.asymptotic_delta_r()
    if a is not None:
        return (a / p) ** p
    try:
        return divergence_lower_bound(model, p, model.r_min, R)
    except BoundInapplicableError:
        return 0.0


def cheng_upper_bound(model, p, r_max=DEFAULT_R_MAX):
    """(a / p)^p under exponential growth; 0 under polynomial growth."""
    prof = growth_profile(model, r_max)
    if prof.regime != "exponential":
        return 0.0
    return (prof.a / p) ** p


def buckley_koskela_gap(model, p, lam, r_max=DEFAULT_R_MAX):
    if lam < 0:
        raise ParameterError("lambda must be >= 0")
    prof = growth_profile(model, r_max)
    return prof.a - p * lam ** (1.0 / p)


def poli_decay(model, p, r_list):
    """[(r, r^-p V(2r) / V(r))] for each r."""
    out = []
    for r in r_list:
        log_ratio = log_volume(model, 2 * r) - log_volume(model, r)
        val = math.exp(log_ratio - p * math.log(r)) if log_ratio < 700 else math.inf
        out.append((float(r), val))
    return out
