"""Radial p-harmonic potential theory on model ends.

A radial p-harmonic function has constant flux A |f'|^(p-2) f', so the
Dirichlet problem on an annulus reduces to the conductance integral

    I(r0, R) = int_{r0}^{R} A(t)^(-1/(p-1)) dt,

with potential f(r) = I(r, R) / I(r0, R) and p-capacity I(r0, R)^(1-p).
An end is p-hyperbolic exactly when I(r0, inf) is finite.
"""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.special import logsumexp

from .errors import ContractError, GeometryError, ParameterError
from .grids import RadialFunction, build_grid, cutoff
from .model_geometry import ModelManifold
from .quadrature import _GL_W, _GL_X, improper_log_integral, log_integral

PARABOLIC = "PParabolic"
HYPERBOLIC = "PHyperbolic"


def _check_p(p):
    if not p > 1:
        raise ParameterError(f"p must be > 1, got {p}")


def _log_integrand(model, p):
    return lambda t: -model.log_area(t) / (p - 1.0)


def _check_r0(model, r0):
    model.check_radius(r0)
    if not np.isfinite(model.log_area(r0)):
        raise GeometryError(f"A vanishes at r0={r0}; choose r0 inside the end")


def log_conductance(model, p, r0, R=np.inf):
    """log I(r0, R); +inf when the improper integral diverges."""
    _check_p(p)
    _check_r0(model, r0)
    if R == np.inf:
        if model.truncated:
            return np.inf
        res = improper_log_integral(_log_integrand(model, p), r0)
        return res.log_value if res.finite else np.inf
    if not R > r0:
        raise ParameterError("need r0 < R")
    model.check_radius(R)
    return log_integral(_log_integrand(model, p), r0, R)


def conductance_integral(model, p, r0, R=np.inf):
    lv = log_conductance(model, p, r0, R)
    return np.inf if lv == np.inf else float(np.exp(lv))


def p_capacity(model, p, r0, R=np.inf):
    """I(r0, R)^(1-p) in the unit-sphere-measure normalization; 0 if I = inf."""
    lv = log_conductance(model, p, r0, R)
    if lv == np.inf:
        return 0.0
    return float(np.exp((1.0 - p) * lv))


def _cell_log_integrals(g, nodes):
    lo, hi = nodes[:-1], nodes[1:]
    half = 0.5 * (hi - lo)
    pts = (0.5 * (hi + lo))[:, None] + half[:, None] * _GL_X[None, :]
    vals = g(pts.ravel()).reshape(pts.shape)
    return np.log(half) + logsumexp(vals + np.log(_GL_W)[None, :], axis=1)


def log_tail_conductances(model, p, nodes, log_tail=-np.inf):
    """log I(node_i, node_last) + tail for every node, by reverse accumulation."""
    cells = _cell_log_integrals(_log_integrand(model, p), np.asarray(nodes, dtype=float))
    out = np.empty(len(nodes))
    out[-1] = log_tail
    acc = log_tail
    for i in range(len(cells) - 1, -1, -1):
        acc = np.logaddexp(acc, cells[i])
        out[i] = acc
    return out


def annulus_potential(model, p, r0, R, size=2001, stretch=1.0, r_plot=None):
    """Exhaustion solution f with f(r0) = 1, f(R) = 0 (closed form).

    For R = inf this is the limit potential I(r, inf) / I(r0, inf), tabulated
    on [r0, r_plot] (default 10 r0 + 10); it is identically 1 on a parabolic
    end.
    """
    _check_p(p)
    _check_r0(model, r0)
    g = _log_integrand(model, p)
    infinite = R == np.inf
    hi = (r_plot if r_plot is not None else 10 * r0 + 10) if infinite else R
    grid = build_grid(r0, hi, size, stretch)
    log_tail = log_conductance(model, p, hi, np.inf) if infinite else -np.inf
    if infinite and log_tail == np.inf:
        ones = np.ones(grid.size)
        one = lambda r: np.ones_like(np.asarray(r, dtype=float))  # noqa: E731
        zero = lambda r: np.zeros_like(np.asarray(r, dtype=float))  # noqa: E731
        return RadialFunction(grid, ones, np.zeros(grid.size), (r0, np.inf), one, zero)
    logI = log_tail_conductances(model, p, grid.nodes, log_tail)
    log_total = logI[0]
    if log_total == -np.inf:
        raise GeometryError("degenerate area element: zero conductance integral")
    values = np.exp(logI - log_total)
    values[0] = 1.0
    deriv = -np.exp(g(grid.nodes) - log_total)

    def value_fn(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        for i, x in enumerate(r):
            li = log_conductance(model, p, x, R) if x < R else -np.inf
            out[i] = np.exp(li - log_total)
        return out

    def deriv_fn(r):
        return -np.exp(g(np.asarray(r, dtype=float)) - log_total)

    return RadialFunction(grid, values, deriv, (r0, R), value_fn, deriv_fn)


def reflect(f):
    """1 - f: the potential vanishing on the inner boundary."""
    vf = f.value_fn
    df = f.deriv_fn
    return RadialFunction(
        f.grid,
        1.0 - f.values,
        -f.derivative,
        f.support,
        (lambda r: 1.0 - vf(r)) if vf else None,
        (lambda r: -df(r)) if df else None,
    )


def p_energy(model, p, f):
    """Quadrature of A |f'|^p over the support of f (improper when R = inf)."""
    lo, hi = f.support
    if f.deriv_fn is None:
        x = f.grid.nodes
        return float(simpson(np.exp(model.log_area(x)) * np.abs(f.derivative) ** p, x=x))

    def g(t):
        with np.errstate(divide="ignore"):
            return p * np.log(np.abs(f.deriv_fn(t))) + model.log_area(t)

    if hi == np.inf:
        res = improper_log_integral(g, lo)
        return res.value
    return float(np.exp(log_integral(g, lo, hi)))


@dataclass
class EndClassification:
    verdict: str
    tail_integral: float  # inf for a parabolic end
    liminf_estimate: float
    evidence: str
    model: str = ""
    p: float = float("nan")
    r0: float = float("nan")

    @property
    def hyperbolic(self):
        return self.verdict == HYPERBOLIC


def classify_end(model, p, r0=None):
    """p-parabolic / p-hyperbolic verdict from finiteness of I(r0, inf)."""
    _check_p(p)
    if r0 is None:
        r0 = max(model.r_min, 1.0)
    _check_r0(model, r0)
    if model.truncated:
        return EndClassification(
            PARABOLIC, np.inf, 1.0,
            f"truncated end (A = 0 beyond r={model.r_max}): I(r0, inf) = inf",
            model.label, p, r0,
        )
    res = improper_log_integral(_log_integrand(model, p), r0)
    n = len(res.windows)
    if res.finite:
        ev = (
            f"I({r0:g}, inf) = {res.value:.12g} finite after {n} windows ({res.reason}); "
            "exhaustion limit f(r) = I(r, inf)/I(r0, inf) -> 0"
        )
        return EndClassification(HYPERBOLIC, res.value, 0.0, ev, model.label, p, r0)
    last = res.windows[-1][2]
    ev = (
        f"I({r0:g}, inf) diverges after {n} windows ({res.reason}; last log-increment {last:.6g}); "
        "exhaustion limit f = 1"
    )
    return EndClassification(PARABOLIC, np.inf, 1.0, ev, model.label, p, r0)


# Caccioppoli ------------------------------------------------------------------


@dataclass
class CaccioppoliCheck:
    lhs: float
    rhs: float
    holds: bool
    label: str = ""

    @property
    def ratio(self):
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else np.inf
        return self.lhs / self.rhs


def check_caccioppoli(model, p, u, phi):
    """Compare int phi^p |u'|^p A with p^p int u^p |phi'|^p A.

    ``u`` must vanish at one end of the interval (the Gamma side) and ``phi``
    at the other, with 0 <= phi <= 1; otherwise ContractError.
    """
    _check_p(p)
    x = u.grid.nodes
    if phi.grid.nodes.shape != x.shape or not np.allclose(phi.grid.nodes, x, rtol=0, atol=1e-14):
        raise ContractError("u and phi must live on the same grid")
    scale = max(np.max(np.abs(u.values)), 1e-300)
    at_lo = abs(u.values[0]) <= 1e-12 * scale
    at_hi = abs(u.values[-1]) <= 1e-12 * scale
    if not (at_lo or at_hi):
        raise ContractError("u must vanish on one boundary component")
    far = phi.values[-1] if at_lo else phi.values[0]
    if at_lo and at_hi:
        far = 0.0
    if abs(far) > 1e-12:
        raise ContractError("phi must vanish on the boundary away from Gamma")
    if np.any(phi.values < -1e-12) or np.any(phi.values > 1 + 1e-12):
        raise ContractError("phi must satisfy 0 <= phi <= 1")
    A = np.exp(model.log_area(x))
    lhs = float(simpson(np.abs(phi.values) ** p * np.abs(u.derivative) ** p * A, x=x))
    rhs = float(p**p * simpson(np.abs(u.values) ** p * np.abs(phi.derivative) ** p * A, x=x))
    return CaccioppoliCheck(lhs, rhs, lhs <= rhs * (1 + 1e-8))


CACCIOPPOLI_MODELS = [ModelManifold.euclidean(n) for n in (3, 4, 5)] + [
    ModelManifold.hyperbolic(n) for n in (2, 3, 4)
]


def caccioppoli_sweep(n_cases=100, seed=0, size=2001):
    """Seeded random (model, p, annulus, cutoff) configurations."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_cases):
        model = CACCIOPPOLI_MODELS[rng.integers(len(CACCIOPPOLI_MODELS))]
        p = float(rng.choice([1.5, 2.0, 3.0]))
        r0 = float(rng.uniform(0.5, 2.0))
        R = r0 + float(rng.uniform(0.5, 4.0))
        u = reflect(annulus_potential(model, p, r0, R, size=size))
        a, b = np.sort(rng.uniform(r0, R, 2))
        d = b + float(rng.uniform(0.0, 1.0)) * (R - b)
        phi = cutoff(u.grid, (r0, d), (r0, b) if rng.random() < 0.5 else (a, b))
        res = check_caccioppoli(model, p, u, phi)
        res.label = f"{model.label} p={p:g} Omega=({r0:.4f},{R:.4f}) plateau=({a:.4f},{b:.4f}) end={d:.4f}"
        out.append(res)
    return out
