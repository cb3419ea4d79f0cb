"""Finite volume or p-hyperbolic: the two dichotomy engines.

Sobolev engine: probe a Sobolev constant C for

    (int |u|^q)^(p/q) <= C int |u'|^p      (u compactly supported in the end)

run the constant chain C1 = 2^(p-1) C, C2 = (1 + p^p) C1, C3 = g^p C2 (g the
cutoff gradient bound) and either certify p-hyperbolicity or check the
finite-volume conclusion (V(r1) - V(r0))^(p/q) <= C3 V(r0).

Mean-curvature engine: for an immersed end given by its area element A(r) and
mean-curvature magnitude H(r), track

    h(r) = int_{r0}^{r} f_r^(pm/(m-p)) A

along the exhaustion potentials f_r and the Hoffmann-Spruck consequence

    (SC)^-1 h^((m-p)/m) <= int_{E_r0} f_r^p |phi'|^p A + int_{E_r} f_r^p H^p A,
    C = 1 + p^p.

The probe only ever sees finitely many test functions, so a finite C is a
lower estimate.  Verdicts that rely on it are flagged probe-conditional.
"""
import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import PchipInterpolator
from scipy.special import logsumexp

from .errors import ParameterError, TheoremViolationError
from .grids import SMOOTHSTEP_MAX_SLOPE, cutoff_fns, smoothstep, smoothstep_slope
from .model_geometry import ModelManifold, log_volume, read_profile_csv, total_volume
from .quadrature import _GL_W, _GL_X, improper_log_integral, log_integral
from .radial_potential import HYPERBOLIC, classify_end, log_tail_conductances

FINITE_VOLUME = "FiniteVolume"
HYPOTHESIS_FAILED = "HypothesisFailed"

DILATION_FACTOR = 4.0
DILATION_LEVELS = 6
BLOWUP_FACTOR = 10.0


# Sobolev probe ---------------------------------------------------------------


@dataclass
class SobolevData:
    p: float
    q: float
    C: float  # inf when a dilation sequence blows up
    probe_trace: list = field(default_factory=list)  # (test-function id, quotient)

    def __post_init__(self):
        if not (1 < self.p <= self.q):
            raise ParameterError("need 1 < p <= q")

    @property
    def finite(self):
        return math.isfinite(self.C)


@dataclass(frozen=True)
class _Shape:
    kind: str  # "bump" | "talenti"
    a: float  # support start offset (scale 1)
    b: float  # support end offset
    ramp: float  # bump: ramp fraction; talenti: exponent beta

    def ident(self, level):
        return f"{self.kind}[{self.a:.4f},{self.b:.4f},{self.ramp:.4f}]@{level}"


def _shape_family(n_shapes, dim, p, rng):
    shapes = []
    for j in range(n_shapes):
        if j % 2 == 0:
            a = float(rng.uniform(0.25, 2.0))
            b = a + float(rng.uniform(0.5, 3.0))
            shapes.append(_Shape("bump", a, b, float(rng.uniform(0.1, 0.5))))
        else:
            beta = (dim - p) / p if dim > p else 1.0
            shapes.append(_Shape("talenti", 0.0, float(rng.uniform(3.0, 8.0)), beta))
    return shapes


def _shape_fns(shape, p, r_min, s):
    """(u, u') of a dilated test function supported in (r_min, r_min + s b]."""
    lo, hi = r_min + s * shape.a, r_min + s * shape.b
    if shape.kind == "bump":
        w = shape.ramp * (hi - lo)
        value, slope = cutoff_fns((lo, hi), (lo + w, hi - w))
        return value, slope, lo, hi

    e = p / (p - 1)
    beta = shape.ramp
    cut = (1 + shape.b**e) ** -beta

    def prof(r):
        x = np.clip((r - r_min) / s, 0.0, None)
        return np.where(x < shape.b, (1 + x**e) ** -beta - cut, 0.0)

    def dprof(r):
        x = np.clip((r - r_min) / s, 0.0, None)
        return np.where(x < shape.b, -beta * e * x ** (e - 1) * (1 + x**e) ** (-beta - 1) / s, 0.0)

    if r_min == 0:
        return prof, dprof, 0.0, hi
    # an end with a boundary: switch the profile on over [r_min, r_min + s/2]
    ramp_w = 0.5 * s

    def value(r):
        return prof(r) * smoothstep((np.asarray(r) - r_min) / ramp_w)

    def slope(r):
        t = (np.asarray(r) - r_min) / ramp_w
        return dprof(r) * smoothstep(t) + prof(r) * smoothstep_slope(t) / ramp_w

    return value, slope, r_min, hi


def _log_quadrature_nodes(model, lo, hi):
    la, lb = model.log_area(np.array([lo, hi]))
    span = abs(lb - la) if np.isfinite(la) and np.isfinite(lb) else 0.0
    n_pan = int(min(max(128, math.ceil(span)), 50_000))
    edges = np.linspace(lo, hi, n_pan + 1)
    half = 0.5 * np.diff(edges)
    pts = (0.5 * (edges[1:] + edges[:-1]))[:, None] + half[:, None] * _GL_X[None, :]
    logw = (np.log(half)[:, None] + np.log(_GL_W)[None, :]).ravel()
    return pts.ravel(), logw


def sobolev_quotient(model, p, q, u, du, lo, hi):
    """(int |u|^q A)^(p/q) / int |u'|^p A by log-space Gauss-Legendre."""
    x, logw = _log_quadrature_nodes(model, lo, hi)
    la = model.log_area(x)
    with np.errstate(divide="ignore"):
        lu = np.log(np.abs(u(x)))
        ldu = np.log(np.abs(du(x)))
    num = (p / q) * logsumexp(q * lu + la + logw)
    den = logsumexp(p * ldu + la + logw)
    return float(np.exp(num - den))


def sobolev_probe(model, p, q, family_size=24, seed=0, levels=DILATION_LEVELS,
                  factor=DILATION_FACTOR):
    """Largest Sobolev quotient over a seeded family of dilated test functions.

    Each shape is evaluated at dilations factor^0 .. factor^(levels-1).  C is
    reported infinite when some shape's quotient increases monotonically
    over the last three levels and grows by more than 10x across them.
    The family for a larger ``family_size`` contains the smaller one.
    """
    if not (1 < p <= q):
        raise ParameterError("need 1 < p <= q")
    if family_size < 10:
        raise ParameterError("family_size must be >= 10")
    rng = np.random.default_rng(seed)
    n_shapes = max(1, family_size // levels)
    shapes = _shape_family(n_shapes, model.dim, p, rng)
    trace = []
    best = 0.0
    blowup = False
    for shape in shapes:
        seq = []
        for lev in range(levels):
            s = factor**lev
            u, du, lo, hi = _shape_fns(shape, p, model.r_min, s)
            if hi > model.r_max:
                break
            Q = sobolev_quotient(model, p, q, u, du, lo, hi)
            seq.append(Q)
            trace.append((shape.ident(lev), Q))
            if math.isfinite(Q):
                best = max(best, Q)
        if len(seq) >= 4:
            tail = seq[-4:]
            if all(b > a for a, b in zip(tail, tail[1:])) and tail[-1] > BLOWUP_FACTOR * tail[0]:
                blowup = True
    return SobolevData(p, q, math.inf if blowup else best, trace)


# Sobolev dichotomy ----------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantChain:
    C1: float
    C2: float
    C3: float


def theorem1_constant_chain(C, p, grad_bound):
    if not (C > 0 and p > 0 and grad_bound > 0):
        raise ParameterError("constant chain needs positive inputs")
    C1 = C * 2.0 ** (p - 1)
    C2 = C1 * (1.0 + p**p)
    return ConstantChain(C1, C2, C2 * grad_bound**p)


@dataclass
class DichotomyReport:
    verdict: str
    model: str = ""
    p: float = float("nan")
    q: float = float("nan")
    constants: dict = field(default_factory=dict)
    volume_check: list = field(default_factory=list)  # (r1, lhs, rhs, holds)
    h_trace: list = field(default_factory=list)  # (r, h(r))
    sobc_trace: list = field(default_factory=list)  # (r, lhs, rhs, holds)
    h_bound: float = float("nan")
    r0_small: float = float("nan")
    probe_conditional: bool = False
    notes: list = field(default_factory=list)

    def to_text(self):
        lines = [f"verdict: {self.verdict}" + (" (probe-conditional)" if self.probe_conditional else ""),
                 f"model: {self.model}  p={self.p:g}  q={self.q:g}"]
        for k, v in self.constants.items():
            lines.append(f"  {k} = {v:.10g}")
        for r1, lhs, rhs, ok in self.volume_check:
            lines.append(f"  volume r1={r1:g}: {lhs:.6g} <= {rhs:.6g} {'ok' if ok else 'FAILS'}")
        for r, h in self.h_trace:
            lines.append(f"  h({r:g}) = {h:.10g}")
        if math.isfinite(self.h_bound):
            lines.append(f"  h bound = {self.h_bound:.6g} (r0 after smallness = {self.r0_small:g})")
        lines += [f"  note: {n}" for n in self.notes]
        return "\n".join(lines) + "\n"

    def to_csv(self):
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["model", "p", "q", "verdict", "quantity", "r", "value", "bound", "holds"])
        base = [self.model, self.p, self.q, self.verdict]
        for k, v in self.constants.items():
            w.writerow(base + [k, "", repr(float(v)), "", ""])
        for r1, lhs, rhs, ok in self.volume_check:
            w.writerow(base + ["volume", r1, repr(lhs), repr(rhs), int(ok)])
        for (r, h), (_, lhs, rhs, ok) in zip(self.h_trace, self.sobc_trace or [(None,) * 4] * len(self.h_trace)):
            w.writerow(base + ["h", r, repr(h), repr(self.h_bound), "" if ok is None else int(ok)])
        return out.getvalue()


def theorem1_classify(model, sob, r0, r1=None):
    """Apply the dichotomy to ``model`` given a probed Sobolev constant."""
    rep = DichotomyReport(HYPOTHESIS_FAILED, model.label, sob.p, sob.q)
    if not sob.finite:
        rep.notes.append("Sobolev probe blew up under dilation: hypothesis fails")
        return rep
    if not r0 > model.r_min:
        raise ParameterError("need r0 > r_min (room for the cutoff)")
    rep.probe_conditional = True
    grad_bound = SMOOTHSTEP_MAX_SLOPE / (r0 - model.r_min)
    chain = theorem1_constant_chain(sob.C, sob.p, grad_bound)
    rep.constants = {"C": sob.C, "grad_bound": grad_bound, "C1": chain.C1, "C2": chain.C2, "C3": chain.C3}
    end = classify_end(model, sob.p, r0)
    if end.verdict == HYPERBOLIC:
        rep.verdict = HYPERBOLIC
        rep.notes.append(end.evidence)
        return rep
    vol = total_volume(model)
    if not vol.finite:
        raise TheoremViolationError(
            f"{model.label}: finite probed C={sob.C:.6g}, p-parabolic and infinite volume"
        )
    rep.verdict = FINITE_VOLUME
    rep.notes.append(end.evidence)
    v0 = math.exp(log_volume(model, r0))
    r_end = model.r_max
    r1s = [r1] if r1 is not None else []
    r1s += list(np.linspace(r0, r_end, 9)[1:]) if math.isfinite(r_end) else []
    r1s.append(math.inf)
    for x in r1s:
        vx = vol.value if x == math.inf or x >= r_end else math.exp(log_volume(model, x))
        lhs = max(vx - v0, 0.0) ** (sob.p / sob.q)
        rhs = chain.C3 * v0
        rep.volume_check.append((float(x), lhs, rhs, bool(lhs <= rhs)))
    return rep


# mean-curvature dichotomy ----------------------------------------------------------------------


@dataclass
class ImmersedEndProfile:
    m: int
    model: ModelManifold  # induced area element of the end
    H: Callable = field(default=lambda r: np.zeros_like(np.asarray(r, dtype=float)), repr=False)
    S: float = 1.0
    label: str = ""

    def __post_init__(self):
        if self.m < 3:
            raise ParameterError("submanifold dimension m must be >= 3")
        if not self.S > 0:
            raise ParameterError("Sobolev constant S must be > 0")
        if not self.label:
            self.label = self.model.label

    @classmethod
    def from_csv(cls, path, m, S=1.0):
        r, a, extra = read_profile_csv(path, columns=("r", "A"), optional=("H",))
        hvals = extra.get("H", np.zeros_like(r))
        if np.any(hvals < 0):
            raise ParameterError("H column must be >= 0")
        interp = PchipInterpolator(r, hvals, extrapolate=False)
        model = ModelManifold.tabulated(r, a, label=str(path), dim=m)
        return cls(m, model, lambda x: np.maximum(np.nan_to_num(interp(x)), 0.0), S, str(path))


def mean_curvature_norm(profile, q, r0):
    """||H||_{L^q(E \\ E_r0)}, inf when the integral diverges."""
    if not q >= 1:
        raise ParameterError("q must be >= 1")
    model = profile.model

    def g(t):
        with np.errstate(divide="ignore"):
            return q * np.log(profile.H(t)) + model.log_area(t)

    if model.truncated:
        lv = log_integral(g, r0, model.r_max)
        return float(np.exp(lv / q))
    res = improper_log_integral(g, r0)
    return float(np.exp(res.log_value / q)) if res.finite else math.inf


def _h_nodes(r_min, r0, r, step=2e-3):
    # fixed spacing beyond r0 keeps h(r) comparable across r
    n2 = 2 * int(math.ceil((r - r0) / (2 * step))) + 1
    return np.concatenate([np.linspace(r_min, r0, 801)[:-1], np.linspace(r0, r, n2)]), 800


def theorem2_h_tracker(profile, p, r0, r_list, q=None):
    """h(r) along the exhaustion plus the (SC)^-1 h^((m-p)/m) inequality check."""
    m, S, model = profile.m, profile.S, profile.model
    if not 1 < p < m:
        raise ParameterError(f"need 1 < p < m (p={p}, m={m})")
    if not r0 > model.r_min:
        raise ParameterError("need r0 > r_min")
    if not np.isfinite(model.log_area(model.r_min)):
        raise ParameterError("the end needs an inner boundary r_min with A(r_min) > 0")
    C = 1.0 + p**p
    expo = p * m / (m - p)
    rep = DichotomyReport(HYPOTHESIS_FAILED, profile.label, p, float("nan"))
    rep.constants = {"S": S, "C": C, "exponent": expo}

    qs = [q] if q is not None else list(np.linspace(p, m, 9))
    norms = [(qq, mean_curvature_norm(profile, qq, r0)) for qq in qs]
    finite = [(qq, nv) for qq, nv in norms if math.isfinite(nv)]
    for qq, nv in norms:
        rep.notes.append(f"||H||_L^{qq:g}(E - E_r0) = {nv:.6g}")
    if not finite:
        rep.notes.append("mean curvature not in L^q for any q in [p, m]: hypothesis fails")
        return rep
    q_use = finite[0][0]
    rep.q = q_use

    # smallness: enlarge r0 until ||H||^p_{L^q(E - E_r0)} < 1 / (2 S C)
    target = 1.0 / (2 * S * C)
    r0s = r0
    while mean_curvature_norm(profile, q_use, r0s) ** p >= target:
        r0s = r0s + max(r0s - model.r_min, 1.0)
        if r0s >= model.r_max or r0s > 1e6:
            rep.notes.append("smallness condition could not be met")
            return rep
    rep.r0_small = r0s

    phi, dphi = cutoff_fns((model.r_min, math.inf), (r0s, math.inf))
    for r in r_list:
        if r <= r0s:
            continue
        x, k0 = _h_nodes(model.r_min, r0s, r)
        la = model.log_area(x)
        logI = log_tail_conductances(model, p, x)
        f = np.exp(logI - logI[0])
        A = np.exp(la)
        h = float(simpson(f[k0:] ** expo * A[k0:], x=x[k0:]))
        middle = float(simpson((phi(x) * f) ** expo * A, x=x))
        bdry = float(simpson(f[: k0 + 1] ** p * np.abs(dphi(x[: k0 + 1])) ** p * A[: k0 + 1], x=x[: k0 + 1]))
        hterm = float(simpson(f**p * profile.H(x) ** p * A, x=x))
        lhs = h ** ((m - p) / m) / (S * C)
        mid = middle ** ((m - p) / m) / (S * C)
        rhs = bdry + hterm
        rep.h_trace.append((float(r), h))
        rep.sobc_trace.append((float(r), lhs, rhs, bool(lhs <= mid * (1 + 1e-10) and mid <= rhs)))

    x = np.linspace(model.r_min, r0s, 2001)
    A = np.exp(model.log_area(x))
    b0 = float(simpson(np.abs(dphi(x)) ** p * A, x=x) + simpson(profile.H(x) ** p * A, x=x))
    rep.h_bound = (2 * S * C * b0) ** (m / (m - p))
    rep.constants["boundary_term"] = b0

    vol = total_volume(model)
    if vol.finite:
        rep.verdict = FINITE_VOLUME
        return rep
    end = classify_end(model, p, r0)
    rep.notes.append(end.evidence)
    if end.verdict == HYPERBOLIC:
        rep.verdict = HYPERBOLIC
    else:
        rep.notes.append(
            "parabolic with infinite volume although ||H|| is finite: the profile cannot "
            "carry a Hoffmann-Spruck inequality, so the theorem's hypotheses are not met"
        )
    return rep


# sweep ---------------------------------------------------------------------------


def builtin_suite():
    return (
        [ModelManifold.euclidean(n) for n in (2, 3, 4, 5)]
        + [ModelManifold.hyperbolic(n) for n in (2, 3, 4)]
        + [ModelManifold.complex_hyperbolic(m) for m in (1, 2)]
        + [ModelManifold.quaternionic_hyperbolic(m) for m in (1, 2)]
        + [ModelManifold.polynomial(k) for k in (0, 1, 2, 3)]
    )


def dichotomy_sweep(models=None, p_list=(1.5, 2.0, 3.0), seed=0, family_size=24, r0=1.0):
    """Sobolev dichotomy over models x p x q in {p, 2p}.

    Returns rows (model, p, q, C, verdict, volume_finite, violation).
    """
    rows = []
    for model in models or builtin_suite():
        vol_finite = total_volume(model).finite
        for p in p_list:
            for q in (p, 2 * p):
                sob = sobolev_probe(model, p, q, family_size, seed)
                end = classify_end(model, p, max(r0, model.r_min + 1e-3))
                violation = sob.finite and not end.hyperbolic and not vol_finite
                rows.append((model.label, p, q, sob.C, end.verdict, vol_finite, violation))
    return rows
