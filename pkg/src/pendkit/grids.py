"""Grids, radial functions and the smoothstep cutoff family."""
import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class Grid:
    nodes: np.ndarray
    weights: np.ndarray  # trapezoid weights

    def __post_init__(self):
        if self.nodes.size < 3:
            raise ParameterError("grid needs at least 3 nodes")
        if np.any(np.diff(self.nodes) <= 0):
            raise ParameterError("grid nodes must be strictly increasing")

    @property
    def size(self):
        return self.nodes.size

    @property
    def spacing(self):
        return np.diff(self.nodes)

    @property
    def midpoints(self):
        return 0.5 * (self.nodes[1:] + self.nodes[:-1])

    @classmethod
    def from_nodes(cls, nodes):
        nodes = np.asarray(nodes, dtype=float)
        h = np.diff(nodes)
        w = np.zeros_like(nodes)
        w[:-1] += 0.5 * h
        w[1:] += 0.5 * h
        return cls(nodes, w)


def build_grid(r0, R, size, stretch=1.0):
    """Nodes on [r0, R]; spacing grows geometrically by ``stretch`` per cell."""
    if not (np.isfinite(r0) and np.isfinite(R) and r0 < R):
        raise ParameterError(f"invalid grid bounds [{r0}, {R}]")
    if size < 3:
        raise ParameterError("grid size must be >= 3")
    if stretch < 1:
        raise ParameterError("stretch must be >= 1")
    if stretch == 1:
        nodes = np.linspace(r0, R, size)
    else:
        steps = stretch ** np.arange(size - 1)
        nodes = r0 + (R - r0) * np.concatenate([[0.0], np.cumsum(steps)]) / steps.sum()
        nodes[-1] = R
    return Grid.from_nodes(nodes)


@dataclass
class RadialFunction:
    grid: Grid
    values: np.ndarray
    derivative: np.ndarray
    support: tuple
    value_fn: Optional[Callable] = field(default=None, repr=False)
    deriv_fn: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if self.values.shape != self.grid.nodes.shape or self.derivative.shape != self.grid.nodes.shape:
            raise ParameterError("values/derivative must match the grid")

    def __call__(self, r):
        if self.value_fn is not None:
            return self.value_fn(r)
        return np.interp(r, self.grid.nodes, self.values)

    def deriv(self, r):
        if self.deriv_fn is not None:
            return self.deriv_fn(r)
        return np.interp(r, self.grid.nodes, self.derivative)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "value"])
            for r, v in zip(self.grid.nodes, self.values):
                w.writerow([repr(float(r)), repr(float(v))])


def smoothstep(t):
    """Quintic smoothstep 6t^5 - 15t^4 + 10t^3 clipped to [0, 1]."""
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (t * (6 * t - 15) + 10)


def smoothstep_slope(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < 1)
    return np.where(inside, 30 * t**2 * (t - 1) ** 2, 0.0)


SMOOTHSTEP_MAX_SLOPE = 15.0 / 8.0


def cutoff_fns(support, plateau):
    """Value/derivative callables of a cutoff equal to 1 on ``plateau``.

    Ramps are quintic smoothsteps over [support[0], plateau[0]] and
    [plateau[1], support[1]]; a zero-length ramp means the cutoff is 1 up to
    that end of the support.
    """
    c, d = support
    a, b = plateau
    if not (c <= a <= b <= d):
        raise ParameterError("need support[0] <= plateau[0] <= plateau[1] <= support[1]")

    def value(r):
        r = np.asarray(r, dtype=float)
        up = smoothstep((r - c) / (a - c)) if a > c else np.where(r >= c, 1.0, 0.0)
        down = smoothstep((d - r) / (d - b)) if d > b else np.where(r <= d, 1.0, 0.0)
        return np.minimum(up, down)

    def slope(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        if a > c:
            out = out + smoothstep_slope((r - c) / (a - c)) / (a - c)
        if d > b:
            out = out - smoothstep_slope((d - r) / (d - b)) / (d - b)
        return out

    return value, slope


def cutoff(grid, support, plateau):
    value, slope = cutoff_fns(support, plateau)
    x = grid.nodes
    return RadialFunction(grid, value(x), slope(x), (grid.nodes[0], grid.nodes[-1]), value, slope)
