"""Uniformly sampled functions of arclength along a normal curve."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from .errors import InvalidInputError

PERIODIC = "periodic"
EXTRAPOLATE = "extrapolate"


@dataclass(frozen=True)
class ScalarField:
    """Samples ``values[i] = u(x0 + i*dx)``.

    A periodic field has period ``count * dx`` (the right endpoint is not
    stored).  ``func``/``dfunc`` optionally keep an exact representation,
    used instead of interpolation when present.
    """

    x0: float
    dx: float
    values: np.ndarray
    boundary: str = PERIODIC
    func: Callable | None = field(default=None, compare=False, repr=False)
    dfunc: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or len(vals) < 2:
            raise InvalidInputError("a field needs at least two samples")
        if not self.dx > 0:
            raise InvalidInputError("dx must be positive")
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("field values must be finite")
        if self.boundary not in (PERIODIC, EXTRAPOLATE):
            raise InvalidInputError(f"unknown boundary {self.boundary!r}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, func, a, b, cells, boundary=PERIODIC, dfunc=None):
        """Sample ``func`` on ``[a, b]`` split into ``cells`` intervals.

        Periodic grids hold ``cells`` points, others ``cells + 1`` so both
        endpoints are included.
        """
        if cells < 2 or not b > a:
            raise InvalidInputError("need b > a and at least two cells")
        dx = (b - a) / cells
        count = cells if boundary == PERIODIC else cells + 1
        x = a + dx * np.arange(count)
        return cls(a, dx, np.asarray(func(x), dtype=float) + 0.0 * x, boundary, func, dfunc)

    @property
    def count(self):
        return len(self.values)

    @property
    def x(self):
        return self.x0 + self.dx * np.arange(self.count)

    @property
    def period(self):
        return self.count * self.dx

    def with_values(self, values, func=None, dfunc=None):
        return replace(self, values=np.asarray(values, dtype=float), func=func, dfunc=dfunc)

    def derivative(self):
        """Second-order central differences (one-sided at open ends)."""
        return self.with_values(grid_derivative(self.values, self.dx, self.boundary))

    def second_derivative(self):
        return self.with_values(grid_second_derivative(self.values, self.dx, self.boundary))

    def _spline(self):
        if self.boundary == PERIODIC:
            xs = np.append(self.x, self.x0 + self.period)
            return CubicSpline(xs, np.append(self.values, self.values[0]), bc_type="periodic")
        return CubicSpline(self.x, self.values, extrapolate=True)

    def __call__(self, xq):
        """Value at arbitrary points (exact function if known, else cubic spline)."""
        xq = np.asarray(xq, dtype=float)
        if self.func is not None:
            return np.asarray(self.func(xq), dtype=float) + 0.0 * xq
        return self._spline()(self.wrap(xq))

    def slope(self, xq):
        xq = np.asarray(xq, dtype=float)
        if self.dfunc is not None:
            return np.asarray(self.dfunc(xq), dtype=float) + 0.0 * xq
        return self._spline()(self.wrap(xq), 1)

    def wrap(self, xq):
        if self.boundary == PERIODIC:
            return self.x0 + np.mod(np.asarray(xq) - self.x0, self.period)
        return np.asarray(xq)

    def integral(self):
        """Trapezoid quadrature over the domain (periodic: full period)."""
        if self.boundary == PERIODIC:
            return float(np.sum(self.values) * self.dx)
        return float(trapezoid(self.values, dx=self.dx))


def grid_derivative(values, dx, boundary=PERIODIC, axis=-1, order=2):
    """Central differences of order 2 or 4 (one-sided stencils at open ends)."""
    v = np.asarray(values, dtype=float)
    if order == 2:
        if boundary == PERIODIC:
            return (np.roll(v, -1, axis=axis) - np.roll(v, 1, axis=axis)) / (2 * dx)
        return np.gradient(v, dx, axis=axis, edge_order=2)
    if order != 4:
        raise InvalidInputError("order must be 2 or 4")
    v = np.moveaxis(v, axis, -1)
    if boundary == PERIODIC:
        out = (8 * (np.roll(v, -1, -1) - np.roll(v, 1, -1)) - (np.roll(v, -2, -1) - np.roll(v, 2, -1))) / (12 * dx)
        return np.moveaxis(out, -1, axis)
    if v.shape[-1] < 5:
        raise InvalidInputError("fourth-order differences need at least five samples")
    out = np.empty_like(v)
    out[..., 2:-2] = (8 * (v[..., 3:-1] - v[..., 1:-3]) - (v[..., 4:] - v[..., :-4])) / (12 * dx)
    # fourth-order one-sided stencils for the two points at each end
    c0 = np.array([-25, 48, -36, 16, -3]) / (12 * dx)
    c1 = np.array([-3, -10, 18, -6, 1]) / (12 * dx)
    out[..., 0] = v[..., :5] @ c0
    out[..., 1] = v[..., :5] @ c1
    out[..., -1] = -(v[..., -5:][..., ::-1] @ c0)
    out[..., -2] = -(v[..., -5:][..., ::-1] @ c1)
    return np.moveaxis(out, -1, axis)


def grid_second_derivative(values, dx, boundary=PERIODIC):
    v = np.asarray(values, dtype=float)
    if boundary == PERIODIC:
        return (np.roll(v, -1) - 2 * v + np.roll(v, 1)) / dx**2
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / dx**2
    # second-order one-sided stencils at the ends
    out[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / dx**2
    out[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / dx**2
    return out


def stack_fields(fields):
    """``(n, count)`` array from a list of compatible fields."""
    first = fields[0]
    for f in fields[1:]:
        if f.count != first.count or f.dx != first.dx or f.x0 != first.x0:
            raise InvalidInputError("fields live on different grids")
    return np.stack([f.values for f in fields])
