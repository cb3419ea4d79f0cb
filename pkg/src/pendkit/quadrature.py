"""Log-space quadrature.

Area elements of hyperbolic-type models span hundreds of orders of magnitude
over desk-scale radii, so every integral here takes the *logarithm* of the
integrand and returns the logarithm of the integral.

``log_integral`` is a composite Gauss-Legendre rule with per-panel bisection
until coarse and fine estimates agree.  ``improper_log_integral`` integrates
over doubling windows ``[a + w(2^k - 1), a + w(2^(k+1) - 1)]`` and decides
convergence/divergence with the rule documented on the function.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import NumericError

RTOL = 1e-10
MAX_PANELS = 2**20

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
_LOG_GL_W = np.log(_GL_W)


def logsinh(x):
    """log(sinh x) for x >= 0, stable for large x; -inf at 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        small = np.log(np.sinh(np.minimum(x, 1.0)))
        large = x + np.log1p(-np.exp(-2.0 * np.maximum(x, 1.0))) - np.log(2.0)
    return np.where(x < 1.0, small, large)


def _panel_logs(g, lo, hi):
    half = 0.5 * (hi - lo)
    pts = (0.5 * (hi + lo))[:, None] + half[:, None] * _GL_X[None, :]
    vals = np.asarray(g(pts.ravel()), dtype=float).reshape(pts.shape)
    if np.any(np.isnan(vals)) or np.any(vals == np.inf):
        raise NumericError("non-finite integrand in quadrature")
    with np.errstate(divide="ignore"):
        return np.log(half) + logsumexp(vals + _LOG_GL_W[None, :], axis=1)


def _initial_edges(g, a, b, n_samples=513):
    s = np.linspace(a, b, n_samples)
    gs = np.asarray(g(s), dtype=float)
    fin = np.isfinite(gs)
    if not fin.any():
        return np.linspace(a, b, 9)
    gs = np.where(fin, gs, gs[fin].min() - 50.0)
    # subdivide so that log-integrand changes by about 1 per panel
    k = np.clip(np.ceil(np.abs(np.diff(gs))), 1, 64).astype(int)
    lefts = np.repeat(s[:-1], k)
    frac = np.concatenate([np.arange(n) / n for n in k])
    widths = np.repeat(np.diff(s), k)
    return np.append(lefts + frac * widths, b)


def log_integral(g, a, b, rtol=RTOL, max_panels=MAX_PANELS):
    """log of the integral of exp(g) over [a, b]; -inf for an empty interval."""
    if not b > a:
        return -np.inf
    edges = _initial_edges(g, a, b)
    lo, hi = edges[:-1], edges[1:]
    length = b - a
    accepted = []
    n_panels = lo.size
    while lo.size:
        coarse = _panel_logs(g, lo, hi)
        mid = 0.5 * (lo + hi)
        fine = np.logaddexp(_panel_logs(g, lo, mid), _panel_logs(g, mid, hi))
        est = logsumexp(np.concatenate(accepted + [fine]))
        if est == -np.inf:
            return -np.inf
        with np.errstate(invalid="ignore", over="ignore"):
            rel = np.abs(np.expm1(coarse - fine)) * np.exp(fine - est)
        rel = np.where(fine == -np.inf, 0.0, rel)
        ok = rel <= 0.1 * rtol * np.maximum((hi - lo) / length, 1e-6)
        ok |= (hi - lo) <= 1e-13 * max(abs(a), abs(b), 1.0)
        accepted.append(fine[ok])
        lo, mid, hi = lo[~ok], mid[~ok], hi[~ok]
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        n_panels += lo.size // 2
        if n_panels > max_panels:
            raise NumericError(f"quadrature exceeded {max_panels} panels on [{a}, {b}]")
    return float(logsumexp(np.concatenate(accepted)))


@dataclass
class ImproperIntegral:
    log_value: float
    finite: bool
    reason: str
    windows: list = field(default_factory=list)  # (lo, hi, log increment)

    @property
    def value(self):
        return float(np.exp(self.log_value)) if self.finite else np.inf


LOG_DIVERGE = np.log(1e12)
LOG_NEGLIGIBLE = np.log(1e-12)


def improper_log_integral(g, a, width=None, rtol=RTOL, max_windows=200):
    """Integral of exp(g) over [a, inf) with a reproducible convergence verdict.

    Windows double in length.  Per window:

    * total > 1e12 -> divergent;
    * increment < 1e-12 * total -> convergent;
    * once 6 windows exist, with rho the last 5 increment ratios:
      all rho >= 0.999 (non-decaying increments) -> divergent;
      all rho < 1 and agreeing to 1e-6 (power-law tail) -> convergent, with
      the geometric tail inc * rho / (1 - rho) added.

    Running out of windows falls back to the sign of the last ratio.
    """
    w = float(width) if width is not None else max(abs(a), 1.0)
    log_total = -np.inf
    windows = []
    log_incs = []
    for k in range(max_windows):
        lo = a + w * (2.0**k - 1.0)
        hi = a + w * (2.0 ** (k + 1) - 1.0)
        li = log_integral(g, lo, hi, rtol=rtol)
        windows.append((lo, hi, li))
        log_incs.append(li)
        log_total = np.logaddexp(log_total, li)
        if log_total > LOG_DIVERGE:
            return ImproperIntegral(np.inf, False, "total exceeds 1e12", windows)
        if li == -np.inf or li - log_total <= LOG_NEGLIGIBLE:
            if k >= 2 or li == -np.inf:
                return ImproperIntegral(float(log_total), True, "negligible increment", windows)
        if len(log_incs) >= 6:
            rho = np.exp(np.diff(log_incs[-6:]))
            if np.all(rho >= 1.0 - 1e-3):
                return ImproperIntegral(np.inf, False, "non-decaying increments", windows)
            if np.all(rho < 1.0) and np.ptp(rho) <= 1e-6:
                r = rho[-1]
                tail = li + np.log(r) - np.log1p(-r)
                return ImproperIntegral(
                    float(np.logaddexp(log_total, tail)), True, "geometric tail", windows
                )
    rho = np.exp(log_incs[-1] - log_incs[-2])
    if rho < 1.0:
        tail = log_incs[-1] + np.log(rho) - np.log1p(-rho)
        return ImproperIntegral(float(np.logaddexp(log_total, tail)), True, "window cap", windows)
    return ImproperIntegral(np.inf, False, "window cap", windows)
