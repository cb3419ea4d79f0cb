"""1-D discretization of the weighted p-Laplacian.

u is piecewise linear on a Grid; the area element is sampled at cell
midpoints, and the mass at node i is lumped from its two half cells:

    E(u) = sum_j A(m_j) h_j |(u_{j+1} - u_j)/h_j|^p
    M(u) = sum_i B_i |u_i|^p,  B_i = (h_{i-1} A(m_{i-1}) + h_i A(m_i)) / 2

Discrete fluxes F_j = A(m_j) phi_p(delta_j), phi_p(s) = |s|^(p-2) s, are what
the Euler-Lagrange equations balance:

    F_{i-1} - F_i = lam B_i phi_p(u_i).

For the Dirichlet problem (lam = 0) the flux is constant across cells, which
pins the discrete solution down explicitly; it differs from the closed-form
conductance potential only through the midpoint sampling of A.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, NumericError, ParameterError
from .grids import Grid, RadialFunction, build_grid  # noqa: F401  (re-export)

def _weights(model, grid):
    """Cell-midpoint area elements and lumped node masses, sharing one scale."""
    h = grid.spacing
    log_am = model.log_area(grid.midpoints)
    if not np.all(np.isfinite(log_am)):
        raise NumericError("area element vanishes or is infinite inside the grid")
    shift = log_am.max()
    if log_am.max() - log_am.min() > 1400:
        raise NumericError("area element spans too many orders of magnitude for this grid")
    am = np.exp(log_am - shift)
    b = np.zeros(grid.size)
    b[:-1] += 0.5 * h * am
    b[1:] += 0.5 * h * am
    return h, am, b


def _phi(s, p):
    return np.sign(s) * np.abs(s) ** (p - 1)


def discrete_energy(model, p, grid, u):
    h, am, _ = _weights(model, grid)
    return float(np.sum(am * h * np.abs(np.diff(u) / h) ** p))


def rayleigh_quotient(model, p, grid, u):
    """E(u) / M(u); invariant under u -> c u and A -> c A."""
    h, am, b = _weights(model, grid)
    num = np.sum(am * h * np.abs(np.diff(u) / h) ** p)
    den = np.sum(b * np.abs(u) ** p)
    return float(num / den)


def flux_defect(model, p, grid, u, lam=0.0, interior=None):
    """Euler-Lagrange residual F_{i-1} - F_i - lam B_i phi(u_i), sup-norm over
    ``interior`` nodes, relative to the largest flux."""
    h, am, b = _weights(model, grid)
    flux = am * _phi(np.diff(u) / h, p)
    fl = np.concatenate([[0.0], flux, [0.0]])
    res = fl[:-1] - fl[1:] - lam * b * _phi(u, p)
    if interior is not None:
        res = res[interior]
    scale = np.max(np.abs(flux))
    if scale == 0:
        return float(np.max(np.abs(res)))
    return float(np.max(np.abs(res)) / scale)


def solve_p_dirichlet(model, p, grid, bc=(1.0, 0.0)):
    """Discrete p-harmonic function with u(r0), u(R) = bc.

    The interior equations say the cell fluxes F_j = A(m_j) phi_p(delta_j)
    are all equal, so delta_j = c A(m_j)^(-1/(p-1)) with one unknown c fixed
    by sum h_j delta_j = u(R) - u(r0).  The discrete system is solved
    exactly this way.  Partial sums are accumulated in log space from both
    ends and each node takes the one closer to its own boundary value, so
    values near either boundary keep full relative accuracy even when A
    spans many orders of magnitude.
    """
    if not p > 1:
        raise ParameterError("p must be > 1")
    ua, ub = map(float, bc)
    if not (math.isfinite(ua) and math.isfinite(ub)):
        raise ParameterError("boundary values must be finite")
    x = grid.nodes
    if ua == ub:
        return RadialFunction(grid, np.full(grid.size, ua), np.zeros(grid.size), (x[0], x[-1]))
    log_am = model.log_area(grid.midpoints)
    if not np.all(np.isfinite(log_am)):
        raise NumericError("area element vanishes or is infinite inside the grid")
    log_cells = np.log(grid.spacing) - log_am / (p - 1.0)
    log_tail = np.append(np.logaddexp.accumulate(log_cells[::-1])[::-1], -np.inf)
    log_head = np.insert(np.logaddexp.accumulate(log_cells), 0, -np.inf)
    total = log_tail[0]
    tail, head = np.exp(log_tail - total), np.exp(log_head - total)
    u = np.where(tail <= head, ub + (ua - ub) * tail, ua + (ub - ua) * head)
    u[0], u[-1] = ua, ub
    deriv = np.gradient(u, x)
    return RadialFunction(grid, u, deriv, (x[0], x[-1]))


@dataclass
class SpectralResult:
    lam: float
    eigenfunction: RadialFunction
    residual: float
    iterations: int
    converged: bool
    quotient: float


def _shooter(model, p, grid, left):
    h, am, b = _weights(model, grid)
    h = h.tolist()
    am = am.tolist()
    b = b.tolist()
    n = len(b)
    inv = 1.0 / (p - 1.0)
    pm1 = p - 1.0

    def shoot(lam, keep=False):
        """March the Euler-Lagrange recursion from the left end.

        Returns (first index with u <= 0, or n; u at that index or at the
        last node; list of u if keep).
        """
        if left == "natural":
            u, flux, start = 1.0, 0.0, 0
            us = [1.0]
        else:
            u, flux, start = h[0], am[0], 1
            us = [0.0, h[0]]
        for i in range(start, n - 1):
            flux -= lam * b[i] * u**pm1
            q = flux / am[i]
            u = u + h[i] * (q**inv if q >= 0 else -((-q) ** inv))
            if keep:
                us.append(u)
            if u <= 0.0:
                return i + 1, u, us
        return n, u, us

    return shoot


def p_rayleigh_minimize(model, p, grid, left="natural", tol=1e-8, max_shots=100_000):
    """First discrete eigenpair of -div(A |u'|^(p-2) u') = lam A |u|^(p-2) u.

    u(R) = 0; at the left end either the natural (free) condition, which is
    the regularity condition at a pole, or u(r0) = 0 (``left="dirichlet"``).

    The positive discrete eigenfunction is the Rayleigh-quotient minimizer.
    It is found by marching the Euler-Lagrange recursion from the left end:
    for lam below the first eigenvalue the march stays positive on every
    node, above it the first sign change moves inward.  Bisection brackets
    the value where the first zero sits on the last node, brentq polishes it.
    """
    if not p > 1:
        raise ParameterError("p must be > 1")
    if grid.size < 33:
        raise ParameterError("eigenvalue grid needs >= 33 nodes")
    if left not in ("natural", "dirichlet"):
        raise ParameterError("left must be 'natural' or 'dirichlet'")
    shoot = _shooter(model, p, grid, left)
    n = grid.size
    shots = 0
    lo, hi = 0.0, 1.0
    while True:
        shots += 1
        k, _, _ = shoot(hi)
        if k < n:
            break
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise NumericError("no sign change found while bracketing the eigenvalue")
    while k != n - 1:
        if shots >= max_shots:
            raise ConvergenceError("eigenvalue bracketing exceeded the shot cap")
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        shots += 1
        k, _, _ = shoot(mid)
        if k == n:
            lo = mid
        else:
            hi = mid

    def last(lam):
        nonlocal shots
        shots += 1
        return shoot(lam)[1]

    if k == n - 1 and last(hi) < 0 and lo < hi:
        lam = brentq(last, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
    else:
        lam = hi
    _, _, us = shoot(lam, keep=True)
    u = np.zeros(n)
    k_stop = min(len(us), n)
    u[:k_stop] = us[:k_stop]
    u[-1] = 0.0
    u = np.maximum(u, 0.0)
    _, _, bmass = _weights(model, grid)
    shift = float(model.log_area(grid.midpoints).max())
    # unit p-norm against the true (unshifted) area element
    u = u * np.exp(-(np.log(np.sum(bmass * u**p)) + shift) / p)
    rq = rayleigh_quotient(model, p, grid, u)
    interior = slice(0, n - 1) if left == "natural" else slice(1, n - 1)
    res = flux_defect(model, p, grid, u, lam, interior=interior)
    x = grid.nodes
    ef = RadialFunction(grid, u, np.gradient(u, x), (x[0], x[-1]))
    converged = res <= tol and abs(rq - lam) <= 1e-8 * max(lam, 1e-300)
    return SpectralResult(float(lam), ef, res, shots, bool(converged), rq)
