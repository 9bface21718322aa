"""Evaluable fields over R x T^d: scalars, SPD forms, and product metrics.

A product Lorentzian metric is represented as -lapse(t,x) dt^2 + g_t(x), with
both ingredients given as vectorized callables.  Closed-form fields evaluate
exactly; grid-backed fields interpolate their samples with cubic splines,
periodic in the spatial axes.  All field objects are immutable; evaluation is
pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .domain import SpatialDomain, is_spd_batch
from .errors import DataError, DomainError, ShapeError

CLOSED_FORM = "closed-form"
GRID = "grid"

CONSTANT_IN_T = "constant-in-t"
IDENTICALLY_ONE = "identically-one"

_INF = math.inf


@dataclass(frozen=True)
class PlateauConstraint:
    """A time interval on which a scalar field is constant in t, or exactly 1."""

    t_lo: float
    t_hi: float
    kind: str

    def __post_init__(self):
        if self.kind not in (CONSTANT_IN_T, IDENTICALLY_ONE):
            raise DomainError(f"unknown plateau kind {self.kind!r}")
        if not self.t_lo < self.t_hi:
            raise DomainError("plateau interval must be nondegenerate")

    def overlaps(self, other: "PlateauConstraint") -> bool:
        return self.t_lo < other.t_hi and other.t_lo < self.t_hi


def as_batch(t, x, d: int):
    """Canonicalize (t, x) to (t: (n,), x: (n, d), was_scalar)."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    scalar = t.ndim == 0 and x.ndim <= 1
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        if scalar:
            x = x.reshape(1, -1)
        else:
            x = x.reshape(-1, 1)
    if x.shape[-1] != d:
        raise ShapeError(f"points have dimension {x.shape[-1]}, domain has {d}")
    n = x.shape[0]
    if t.ndim == 0:
        tb = np.full(n, float(t))
    else:
        if t.shape[0] != n:
            raise ShapeError(f"t batch {t.shape[0]} does not match x batch {n}")
        tb = t.astype(float)
    return tb, x, scalar


@dataclass(frozen=True)
class ScalarField:
    """Positive scalar over (t, x) with optional plateau annotations."""

    fn: Callable
    plateaus: tuple[PlateauConstraint, ...] = ()
    representation: str = CLOSED_FORM

    @staticmethod
    def constant(value: float) -> "ScalarField":
        v = float(value)
        return ScalarField(
            fn=lambda t, x: np.full(np.shape(t), v),
            plateaus=(PlateauConstraint(-_INF, _INF, CONSTANT_IN_T),)
            + ((PlateauConstraint(-_INF, _INF, IDENTICALLY_ONE),) if v == 1.0 else ()),
        )

    @staticmethod
    def from_time_function(fn: Callable) -> "ScalarField":
        return ScalarField(fn=lambda t, x: np.asarray(fn(np.asarray(t, float)), float))

    @staticmethod
    def from_space_function(fn: Callable) -> "ScalarField":
        sf = ScalarField(
            fn=lambda t, x: np.asarray(fn(np.asarray(x, float)), float),
            plateaus=(PlateauConstraint(-_INF, _INF, CONSTANT_IN_T),),
        )
        return sf

    def __call__(self, t, x, domain: SpatialDomain | None = None):
        xa = np.asarray(x, dtype=float)
        if domain is not None:
            d = domain.dimension
        elif xa.ndim == 0:
            d = 1
        elif xa.ndim == 1:
            d = xa.shape[0] if np.ndim(t) == 0 else 1
        else:
            d = xa.shape[-1]
        tb, xb, scalar = as_batch(t, x, d)
        out = np.asarray(self.fn(tb, xb), dtype=float)
        out = np.broadcast_to(out, tb.shape)
        return float(out[0]) if scalar else out


@dataclass(frozen=True)
class SpdField:
    """SPD-form-valued field over x alone (a Riemannian metric on the torus)."""

    domain: SpatialDomain
    fn: Callable  # x: (n, d) -> (n, d, d)

    @staticmethod
    def constant(domain: SpatialDomain, mat: np.ndarray) -> "SpdField":
        mat = np.asarray(mat, dtype=float)
        if mat.ndim == 0:
            mat = mat.reshape(1, 1)
        if mat.shape != (domain.dimension, domain.dimension):
            raise ShapeError(
                f"constant form shape {mat.shape} vs domain dimension {domain.dimension}"
            )
        return SpdField(domain, lambda x: np.broadcast_to(mat, (x.shape[0],) + mat.shape))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim <= 1
        if x.ndim == 0:
            x = x.reshape(1, 1)
        elif x.ndim == 1:
            x = x.reshape(1, -1)
        out = np.asarray(self.fn(x), dtype=float)
        return out[0] if single else out

    def scaled(self, factor: float) -> "SpdField":
        f = float(factor)
        return SpdField(self.domain, lambda x, _fn=self.fn: f * np.asarray(_fn(x)))


@dataclass(frozen=True)
class MetricField:
    """Product Lorentzian metric -lapse dt^2 + g_t on R x T^d."""

    domain: SpatialDomain
    lapse: Callable  # (t: (n,), x: (n, d)) -> (n,)
    spatial: Callable  # (t: (n,), x: (n, d)) -> (n, d, d)
    representation: str = CLOSED_FORM
    window: tuple[float, float] = (-_INF, _INF)

    def _check_window(self, t: np.ndarray):
        lo, hi = self.window
        bad = (t < lo) | (t > hi)
        if np.any(bad):
            tb = float(np.asarray(t)[bad][0]) if np.ndim(t) else float(t)
            raise DomainError(
                f"time {tb} outside validity window [{lo}, {hi}]"
            )

    def eval(self, t, x, check: bool = True):
        """Batched evaluation: returns (lapse: (n,), spatial: (n, d, d))."""
        tb, xb, scalar = as_batch(t, x, self.domain.dimension)
        self._check_window(tb)
        lam = np.broadcast_to(np.asarray(self.lapse(tb, xb), dtype=float), tb.shape)
        g = np.asarray(self.spatial(tb, xb), dtype=float)
        if g.shape != (tb.shape[0], self.domain.dimension, self.domain.dimension):
            raise ShapeError(f"spatial field returned shape {g.shape}")
        if check:
            if np.any(lam <= 0):
                i = int(np.argmax(lam <= 0))
                raise DataError(
                    f"non-positive lapse {lam[i]} at t={tb[i]}, x={xb[i].tolist()}"
                )
            ok = is_spd_batch(g)
            if not np.all(ok):
                i = int(np.argmax(~ok))
                raise DataError(
                    f"spatial form not SPD at t={tb[i]}, x={xb[i].tolist()}"
                )
        if scalar:
            return float(lam[0]), g[0]
        return lam, g

    def spatial_slice(self, t: float) -> SpdField:
        """The Riemannian metric g_t at a fixed time, as an SpdField."""
        t = float(t)
        return SpdField(
            self.domain,
            lambda x: np.asarray(self.spatial(np.full(x.shape[0], t), x), dtype=float),
        )

    def lapse_at(self, t, x):
        tb, xb, scalar = as_batch(t, x, self.domain.dimension)
        self._check_window(tb)
        lam = np.broadcast_to(np.asarray(self.lapse(tb, xb), dtype=float), tb.shape)
        return float(lam[0]) if scalar else lam


def metric_eval(m: MetricField, t: float, x) -> tuple[float, np.ndarray]:
    """Single-point evaluation: (lapse, spatial SPD form)."""
    return m.eval(t, x)


def product_metric(
    domain: SpatialDomain,
    lapse: Callable,
    spatial: Callable,
    representation: str = CLOSED_FORM,
    window: tuple[float, float] = (-_INF, _INF),
) -> MetricField:
    return MetricField(domain, lapse, spatial, representation, window)


def ultrastatic_metric(domain: SpatialDomain, h0) -> MetricField:
    """-dt^2 + h0 with time-independent spatial form and unit lapse."""
    h0field = h0 if isinstance(h0, SpdField) else SpdField.constant(domain, h0)
    return MetricField(
        domain,
        lapse=lambda t, x: np.ones_like(t),
        spatial=lambda t, x: h0field.fn(x),
    )


def warped_product(domain: SpatialDomain, scale: Callable, g0: SpdField,
                   lapse: Callable | None = None) -> MetricField:
    """-lapse dt^2 + a(t)^2 g0 for a scalar scale factor a(t)."""
    if lapse is None:
        lapse = lambda t, x: np.ones_like(t)

    def spatial(t, x):
        a = np.asarray(scale(np.asarray(t, float)), float)
        return (a * a)[:, None, None] * np.asarray(g0.fn(x), float)

    return MetricField(domain, lapse=lapse, spatial=spatial)


def time_reverse(m: MetricField) -> MetricField:
    """The metric evaluated at (-t, x); involution, window negated and swapped."""
    lo, hi = m.window
    return replace(
        m,
        lapse=lambda t, x, _f=m.lapse: _f(-t, x),
        spatial=lambda t, x, _f=m.spatial: _f(-t, x),
        window=(-hi, -lo),
    )


def time_shift(m: MetricField, c: float) -> MetricField:
    """The metric evaluated at (t - c, x): m shifted forward in time by c."""
    c = float(c)
    lo, hi = m.window
    return replace(
        m,
        lapse=lambda t, x, _f=m.lapse: _f(t - c, x),
        spatial=lambda t, x, _f=m.spatial: _f(t - c, x),
        window=(lo + c, hi + c),
    )


def conformal_metric(m: MetricField, factor: ScalarField) -> MetricField:
    """Multiply the whole metric (lapse and spatial part) by a positive scalar."""
    def lapse(t, x):
        f = factor.fn(t, x)
        return np.asarray(f, float) * np.asarray(m.lapse(t, x), float)

    def spatial(t, x):
        f = np.asarray(factor.fn(t, x), float)
        return f[:, None, None] * np.asarray(m.spatial(t, x), float)

    return replace(m, lapse=lapse, spatial=spatial)


# ---------------------------------------------------------------------------
# grid-backed representation
# ---------------------------------------------------------------------------

_PAD = 3  # wrap padding cells per side; cubic interpolation needs 2


class _PeriodicInterp:
    """Cubic interpolation of samples on (t_grid x spatial grid), periodic in x."""

    def __init__(self, domain: SpatialDomain, t_grid: np.ndarray, values: np.ndarray):
        t_grid = np.asarray(t_grid, dtype=float)
        if t_grid.ndim != 1 or t_grid.size < 4:
            raise ShapeError("grid representation needs at least 4 time samples")
        if values.shape != (t_grid.size,) + tuple(domain.resolution):
            raise ShapeError(
                f"sample array shape {values.shape} does not match grid"
            )
        self.domain = domain
        axes = [t_grid]
        padded = values
        for ax in range(domain.dimension):
            coords = domain.axis_coords(ax)
            h = domain.circumferences[ax] / domain.resolution[ax]
            ext = np.concatenate(
                [coords[0] - h * np.arange(_PAD, 0, -1), coords,
                 coords[-1] + h * np.arange(1, _PAD + 1)]
            )
            axes.append(ext)
            left = np.take(padded, range(-_PAD, 0), axis=ax + 1)
            right = np.take(padded, range(_PAD), axis=ax + 1)
            padded = np.concatenate([left, padded, right], axis=ax + 1)
        self._rgi = RegularGridInterpolator(
            axes, padded, method="cubic", bounds_error=False, fill_value=None
        )

    def __call__(self, t: np.ndarray, x: np.ndarray) -> np.ndarray:
        pts = np.column_stack([t, self.domain.wrap(x)])
        return self._rgi(pts)


def sample_metric(m: MetricField, t_grid) -> tuple[np.ndarray, np.ndarray]:
    """Sample lapse and spatial form on t_grid x the domain grid.

    Returns (lapse: (nt, *res), spatial: (nt, *res, d, d)).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    pts = m.domain.grid_points()
    res = tuple(m.domain.resolution)
    d = m.domain.dimension
    lam = np.empty((t_grid.size,) + res)
    g = np.empty((t_grid.size,) + res + (d, d))
    for i, t in enumerate(t_grid):
        li, gi = m.eval(np.full(pts.shape[0], t), pts)
        lam[i] = li.reshape(res)
        g[i] = gi.reshape(res + (d, d))
    return lam, g


def grid_metric(
    domain: SpatialDomain,
    t_grid,
    lapse_samples: np.ndarray,
    spatial_samples: np.ndarray,
) -> MetricField:
    """Build an interpolating metric from samples (cubic, periodic in x)."""
    t_grid = np.asarray(t_grid, dtype=float)
    d = domain.dimension
    lam_i = _PeriodicInterp(domain, t_grid, np.asarray(lapse_samples, float))
    comps = {}
    for a in range(d):
        for b in range(a, d):
            comps[(a, b)] = _PeriodicInterp(
                domain, t_grid, np.asarray(spatial_samples, float)[..., a, b]
            )

    def lapse(t, x):
        return lam_i(t, x)

    def spatial(t, x):
        out = np.empty((t.shape[0], d, d))
        for (a, b), interp in comps.items():
            v = interp(t, x)
            out[:, a, b] = v
            out[:, b, a] = v
        return out

    return MetricField(
        domain,
        lapse=lapse,
        spatial=spatial,
        representation=GRID,
        window=(float(t_grid[0]), float(t_grid[-1])),
    )


def grid_sample_metric(m: MetricField, t_grid) -> MetricField:
    """Sample a metric onto the grid and return the interpolating grid metric."""
    lam, g = sample_metric(m, t_grid)
    return grid_metric(m.domain, t_grid, lam, g)


def max_metric_deviation(
    a: MetricField,
    b: MetricField,
    t_samples,
    shift: float = 0.0,
    relative: bool = True,
):
    """Worst componentwise deviation between a(t, x) and b(t + shift, x).

    Returns (max_deviation, (t, x) location of the worst sample).
    """
    if a.domain != b.domain:
        raise ShapeError("metrics live on different spatial domains")
    pts = a.domain.grid_points()
    worst = 0.0
    where = (float(np.asarray(t_samples)[0]), pts[0].tolist())
    for t in np.asarray(t_samples, dtype=float):
        tb = np.full(pts.shape[0], t)
        la, ga = a.eval(tb, pts, check=False)
        lb, gb = b.eval(tb + shift, pts, check=False)
        diff_l = np.abs(la - lb)
        diff_g = np.abs(ga - gb).reshape(pts.shape[0], -1).max(axis=1)
        if relative:
            scale_l = np.maximum(np.maximum(np.abs(la), np.abs(lb)), 1.0)
            scale_g = np.maximum(
                np.abs(ga).reshape(pts.shape[0], -1).max(axis=1), 1.0
            )
            diff_l = diff_l / scale_l
            diff_g = diff_g / scale_g
        dev = np.maximum(diff_l, diff_g)
        i = int(np.argmax(dev))
        if dev[i] > worst:
            worst = float(dev[i])
            where = (float(t), pts[i].tolist())
    return worst, where
