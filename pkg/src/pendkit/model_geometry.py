"""Rotationally symmetric model ends.

A model end is fully described by the area element A(r) of its geodesic
spheres (sphere measure normalized to 1).  Everything downstream (volumes,
conductance integrals, Rayleigh quotients) only ever sees log A, which keeps
exponential-growth models representable out to r ~ 100.

Built-in kinds::

    euclidean(n)   A = r^(n-1)
    hyperbolic(n)  A = sinh(r)^(n-1)
    ch(m)          A = sinh(2r) sinh(r)^(4m-2)         real dimension 2m
    qh(m)          A = sinh(2r)^3 sinh(r)^(4(m-1))     real dimension 4m
    poly(k)        A = r^k
    custom         monotone-cubic interpolation of samples (r_i, A_i)

The ch/qh elements are exp of the integral of the radial Laplacians
2 coth 2r + 2(2m-1) coth r and 6 coth 2r + 4(m-1) coth r, taken verbatim.
"""
import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (
    DiscretizationError,
    DomainError,
    ExtrapolationError,
    NumericError,
    ParameterError,
    ParseError,
)
from .quadrature import improper_log_integral, log_integral, logsinh

EPS_REGIME = 1e-3


class Kind(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    HYPERBOLIC = "hyperbolic"
    CH = "ch"
    QH = "qh"
    POLY = "poly"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ModelManifold:
    kind: Kind
    dim: int
    param: float
    r_min: float = 0.0
    label: str = ""
    scale: float = 1.0
    r_samples: tuple = ()
    a_samples: tuple = ()
    _interp: object = field(default=None, init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ParameterError("dim must be >= 1")
        if self.r_min < 0 or not math.isfinite(self.r_min):
            raise ParameterError("r_min must be finite and >= 0")
        if not self.scale > 0:
            raise ParameterError("scale must be positive")
        if self.kind is Kind.CUSTOM:
            r = np.asarray(self.r_samples, dtype=float)
            a = np.asarray(self.a_samples, dtype=float)
            if r.size < 2 or r.size != a.size:
                raise ParameterError("tabulated model needs >= 2 matching (r, A) samples")
            if np.any(np.diff(r) <= 0):
                raise ParameterError("tabulated r must be strictly increasing")
            if np.any(a <= 0) or not np.all(np.isfinite(a)):
                raise ParameterError("tabulated A must be finite and > 0")
            object.__setattr__(self, "_interp", PchipInterpolator(r, a, extrapolate=False))
        if not self.label:
            object.__setattr__(self, "label", self._default_label())

    # constructors -----------------------------------------------------------

    @classmethod
    def euclidean(cls, n, r_min=0.0, scale=1.0):
        return cls(Kind.EUCLIDEAN, int(n), float(n), r_min, scale=scale)

    @classmethod
    def hyperbolic(cls, n, r_min=0.0, scale=1.0):
        return cls(Kind.HYPERBOLIC, int(n), float(n), r_min, scale=scale)

    @classmethod
    def complex_hyperbolic(cls, m, r_min=0.0, scale=1.0):
        return cls(Kind.CH, 2 * int(m), float(m), r_min, scale=scale)

    @classmethod
    def quaternionic_hyperbolic(cls, m, r_min=0.0, scale=1.0):
        return cls(Kind.QH, 4 * int(m), float(m), r_min, scale=scale)

    @classmethod
    def polynomial(cls, k, r_min=0.0, scale=1.0):
        if k < 0:
            raise ParameterError("polynomial degree k must be >= 0")
        return cls(Kind.POLY, int(math.floor(k)) + 1, float(k), r_min, scale=scale)

    @classmethod
    def tabulated(cls, r, a, label="custom", dim=1, scale=1.0):
        r = tuple(float(x) for x in r)
        return cls(Kind.CUSTOM, int(dim), 0.0, r[0], label, scale, r, tuple(float(x) for x in a))

    @classmethod
    def from_csv(cls, path, dim=1):
        r, a, _ = read_profile_csv(path, columns=("r", "A"))
        return cls.tabulated(r, a, label=str(path), dim=dim)

    def _default_label(self):
        if self.kind in (Kind.EUCLIDEAN, Kind.HYPERBOLIC):
            return f"{self.kind.value}({self.dim})"
        if self.kind is Kind.POLY:
            return f"poly({self.param:g})"
        return f"{self.kind.value}({self.param:g})"

    def rescaled(self, c):
        from dataclasses import replace

        return replace(self, scale=self.scale * c)

    # geometry ---------------------------------------------------------------

    @property
    def truncated(self):
        """Tabulated ends stop at their last sample (A = 0 beyond it)."""
        return self.kind is Kind.CUSTOM

    @property
    def r_max(self):
        return self.r_samples[-1] if self.truncated else np.inf

    def log_area(self, r):
        """Vectorized log A(r); no domain checks."""
        r = np.asarray(r, dtype=float)
        n, m = self.dim, self.param
        with np.errstate(divide="ignore"):
            if self.kind is Kind.EUCLIDEAN:
                out = (n - 1) * np.log(r) if n > 1 else np.zeros_like(r)
            elif self.kind is Kind.HYPERBOLIC:
                out = (n - 1) * logsinh(r) if n > 1 else np.zeros_like(r)
            elif self.kind is Kind.CH:
                out = logsinh(2 * r) + (4 * m - 2) * logsinh(r)
            elif self.kind is Kind.QH:
                out = 3 * logsinh(2 * r) + (4 * (m - 1)) * logsinh(r) if m > 1 else 3 * logsinh(2 * r)
            elif self.kind is Kind.POLY:
                out = m * np.log(r) if m > 0 else np.zeros_like(r)
            else:
                vals = self._interp(r)
                if np.any(np.isnan(vals)):
                    raise ExtrapolationError(
                        f"r outside tabulated range [{self.r_samples[0]}, {self.r_samples[-1]}]"
                    )
                out = np.log(vals)
        return out + math.log(self.scale)

    def asymptotic_delta_r(self):
        """lim delta_r(r) as r -> inf for built-ins, None for tabulated models."""
        return {
            Kind.EUCLIDEAN: 0.0,
            Kind.HYPERBOLIC: float(self.dim - 1),
            Kind.CH: 4.0 * self.param,
            Kind.QH: 4.0 * self.param + 2.0,
            Kind.POLY: 0.0,
        }.get(self.kind)

    def check_radius(self, r):
        if r < self.r_min - 1e-14 * max(1.0, self.r_min):
            raise DomainError(f"r={r} below r_min={self.r_min} of {self.label}")
        if self.truncated and r > self.r_max * (1 + 1e-14):
            raise ExtrapolationError(f"r={r} beyond tabulated range (max {self.r_max})")


def area_element(model, r):
    model.check_radius(r)
    with np.errstate(over="ignore"):
        return float(np.exp(model.log_area(r)))


def log_volume(model, r):
    """log V_E(r) = log of the integral of A over [r_min, r]."""
    if r == np.inf:
        res = total_volume(model)
        return res.log_value
    model.check_radius(r)
    val = log_integral(model.log_area, model.r_min, r)
    if np.isnan(val):
        raise NumericError("non-finite volume")
    return val


def volume(model, r):
    return float(np.exp(log_volume(model, r)))


def total_volume(model):
    """Volume of the whole end with the improper-integral verdict attached."""
    from .quadrature import ImproperIntegral

    if model.truncated:
        lv = log_integral(model.log_area, model.r_min, model.r_max)
        return ImproperIntegral(lv, True, "truncated at last sample")
    return improper_log_integral(model.log_area, model.r_min)


def log_volume_profile(model, rs):
    """log V at each of the increasing radii ``rs`` by cumulative integration."""
    rs = np.asarray(rs, dtype=float)
    out = np.empty_like(rs)
    acc = log_volume(model, rs[0])
    out[0] = acc
    for i in range(1, rs.size):
        acc = np.logaddexp(acc, log_integral(model.log_area, rs[i - 1], rs[i]))
        out[i] = acc
    return out


def delta_r(model, r):
    """Laplacian of the distance function, d/dr log A."""
    if model.kind is Kind.CUSTOM:
        h = 1e-5 * max(1.0, r)
        if r - h < model.r_samples[0] or r + h > model.r_samples[-1]:
            raise DiscretizationError(f"no two-sided neighbourhood of r={r} in the samples")
        return float((model.log_area(r + h) - model.log_area(r - h)) / (2 * h))
    model.check_radius(r)
    if r == 0:
        return np.inf
    n, m = model.dim, model.param
    coth = lambda x: 1.0 / math.tanh(x)  # noqa: E731
    if model.kind is Kind.EUCLIDEAN:
        return (n - 1) / r
    if model.kind is Kind.HYPERBOLIC:
        return (n - 1) * coth(r)
    if model.kind is Kind.CH:
        return 2 * coth(2 * r) + 2 * (2 * m - 1) * coth(r)
    if model.kind is Kind.QH:
        return 6 * coth(2 * r) + 4 * (m - 1) * coth(r)
    return m / r


@dataclass(frozen=True)
class GrowthProfile:
    a: float
    poly_degree: float
    regime: str  # "exponential" | "polynomial"
    log_c: float  # intercept of log V ~ log_c + a r
    rms_exp: float
    rms_poly: float


def growth_profile(model, r_max, n_points=65):
    """Volume growth rates fitted on the tail window [(r_min + r_max)/2, r_max].

    ``a`` is the least-squares slope of log V against r, ``poly_degree`` the
    slope against log r.  The regime is exponential when a > 1e-3 and the
    linear-in-r fit has the smaller residual; a polynomial volume has a
    positive log V / r slope over any finite window, so the slope alone
    cannot tell the two apart.
    """
    if r_max < model.r_min + 10:
        raise ParameterError("growth_profile needs r_max >= r_min + 10")
    r_lo = 0.5 * (model.r_min + r_max)
    rs = np.linspace(r_lo, r_max, n_points)
    lv = log_volume_profile(model, rs)
    if not np.all(np.isfinite(lv)):
        raise NumericError("volume not finite on the tail window")
    a, c = np.polyfit(rs, lv, 1)
    d, _ = np.polyfit(np.log(rs), lv, 1)
    rms_exp = float(np.sqrt(np.mean((np.polyval([a, c], rs) - lv) ** 2)))
    fit_poly = np.polyval(np.polyfit(np.log(rs), lv, 1), np.log(rs))
    rms_poly = float(np.sqrt(np.mean((fit_poly - lv) ** 2)))
    regime = "exponential" if (a > EPS_REGIME and rms_exp < rms_poly) else "polynomial"
    return GrowthProfile(float(a), float(d), regime, float(c), rms_exp, rms_poly)


# CSV ingestion --------------------------------------------------------------


def read_profile_csv(path, columns=("r", "A"), optional=()):
    """Read a headed numeric CSV. Returns (r, A, extra_columns_dict)."""
    wanted = list(columns) + list(optional)
    with open(path, newline="") as fh:
        rows = [(i + 1, row) for i, row in enumerate(csv.reader(fh))]
    rows = [(ln, row) for ln, row in rows if row and not row[0].lstrip().startswith("#")]
    if not rows:
        raise ParseError("empty file", 1)
    ln0, header = rows[0]
    header = [h.strip() for h in header]
    for col in columns:
        if col not in header:
            raise ParseError(f"missing column {col!r} in header {header}", ln0)
    idx = {c: header.index(c) for c in wanted if c in header}
    data = {c: [] for c in idx}
    for ln, row in rows[1:]:
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", ln)
        for c, j in idx.items():
            try:
                v = float(row[j])
            except ValueError:
                raise ParseError(f"column {c!r}: not a number: {row[j]!r}", ln) from None
            if not math.isfinite(v):
                raise ParseError(f"column {c!r}: non-finite value", ln)
            data[c].append(v)
        if len(data["r"]) > 1 and data["r"][-1] <= data["r"][-2]:
            raise ParseError("r must be strictly increasing", ln)
        if data[columns[1]][-1] <= 0:
            raise ParseError(f"{columns[1]} must be > 0", ln)
    if len(data["r"]) < 2:
        raise ParseError("need at least two data rows", rows[-1][0])
    extra = {c: np.array(data[c]) for c in optional if c in data}
    return np.array(data["r"]), np.array(data[columns[1]]), extra
