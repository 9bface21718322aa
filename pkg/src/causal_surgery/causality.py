"""Numerical certificates for causal structure.

Everything here checks, rather than constructs: cone containment by extremal
curve integration, global hyperbolicity via per-slab speed bounds against a
complete reference metric, causal diamond extent, ultrastaticity, and
identity-chart isometry windows.  All sampling is seeded and deterministic.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .domain import SpatialDomain
from .eigen import gen_max_eig_batch, gen_max_eig_direction
from .errors import DomainError, OrderError
from .fields import MetricField, ScalarField, SpdField, as_batch, max_metric_deviation
from .profiles import smooth_unit_step

INF = float("inf")

# Allowed relative excess of g(kdot,kdot) over lambda in the per-step speed
# certificate; covers the O(step^2) midpoint-measurement bias at step 1e-3.
SPEED_CERT_SLACK = 1e-5


# ---------------------------------------------------------------------------
# reference-metric geometry on the torus
# ---------------------------------------------------------------------------


def ref_distance(domain: SpatialDomain, ref: SpdField, x0, x1, n_quad: int = 16):
    """Distance between x0 and x1 in the reference metric.

    Straight coordinate segments are geodesics for constant reference forms on
    the flat torus; for varying forms the segment length is an upper bound.
    The minimum is taken over nearest lattice images.
    """
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    x1 = np.atleast_2d(np.asarray(x1, dtype=float))
    d = domain.dimension
    base = domain.min_image(x1 - x0)
    L = np.asarray(domain.circumferences)
    best = np.full(x0.shape[0], INF)
    s = (np.arange(n_quad) + 0.5) / n_quad
    for shifts in itertools.product((-1.0, 0.0, 1.0), repeat=d):
        disp = base + np.asarray(shifts) * L
        # midpoint quadrature of sqrt(ref(dx, dx)) along the segment
        seg = x0[None, :, :] + s[:, None, None] * disp[None, :, :]
        forms = np.asarray(ref.fn(seg.reshape(-1, d)), dtype=float).reshape(
            n_quad, x0.shape[0], d, d
        )
        quad = np.einsum("qni,qnij,qnj->qn", disp[None], forms, disp[None])
        length = np.sqrt(np.maximum(quad, 0.0)).mean(axis=0)
        best = np.minimum(best, length)
    return best if best.shape[0] > 1 else float(best[0])


def max_coordinate_speed(m: MetricField, ref: SpdField, t, x):
    """Maximal reference-metric speed of causal velocities at (t, x).

    Equals sqrt(lambda * mu) with mu the largest generalized eigenvalue of the
    pencil (ref, g_t): causal curves satisfy g_t(kdot, kdot) <= lambda, so
    their ref-speed is at most this value.
    """
    tb, xb, scalar = as_batch(t, x, m.domain.dimension)
    lam, g = m.eval(tb, xb, check=True)
    refv = np.asarray(ref.fn(xb), dtype=float)
    out = np.sqrt(lam * gen_max_eig_batch(g, refv))
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# direction policies and extremal curve integration
# ---------------------------------------------------------------------------


class ConstantDirection:
    """Fixed coordinate direction (Euclidean unit) for all curves."""

    name = "constant"

    def __init__(self, u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        self.u = u / np.linalg.norm(u, axis=-1, keepdims=True)

    def prepare(self, n, t0, t1, domain, rng):
        if self.u.shape[0] == 1:
            self.u = np.repeat(self.u, n, axis=0)

    def directions(self, t, x):
        return self.u

    def after_step(self, t, x):
        pass


class PiecewiseRandomDirection:
    """Seeded piecewise-constant random unit directions with fixed dwell time."""

    name = "piecewise_random"

    def __init__(self, seed: int, dwell: float = 0.25):
        self.seed = int(seed)
        self.dwell = float(dwell)

    def prepare(self, n, t0, t1, domain, rng):
        self.t0 = min(t0, t1)
        n_seg = int(np.ceil(abs(t1 - t0) / self.dwell)) + 1
        local = np.random.default_rng(self.seed)
        raw = local.standard_normal((n, n_seg, domain.dimension))
        self.table = raw / np.linalg.norm(raw, axis=-1, keepdims=True)

    def directions(self, t, x):
        seg = min(
            int(np.floor((float(np.atleast_1d(t)[0]) - self.t0) / self.dwell)),
            self.table.shape[1] - 1,
        )
        return self.table[:, max(seg, 0), :]

    def after_step(self, t, x):
        pass


class EigenDirection:
    """Direction of maximal reference-speed at the current point."""

    name = "eigen"

    def __init__(self, m: MetricField, ref: SpdField):
        self.m = m
        self.ref = ref

    def prepare(self, n, t0, t1, domain, rng):
        pass

    def directions(self, t, x):
        tb = np.broadcast_to(np.asarray(t, float), (x.shape[0],))
        _, g = self.m.eval(tb, x, check=False)
        refv = np.asarray(self.ref.fn(x), dtype=float)
        return gen_max_eig_direction(g, refv)

    def after_step(self, t, x):
        pass


class HoldAtMaxDirection:
    """Move along a fixed direction, then stop once the wrapped reference
    distance from the start stops growing (past the torus antipode).

    Greedy witness-finder: on a metric violating the cone bound it parks each
    curve at the farthest reachable point instead of wrapping back around.
    """

    name = "hold_at_max"

    def __init__(self, u, domain: SpatialDomain, ref: SpdField):
        self.u0 = np.atleast_2d(np.asarray(u, dtype=float))
        self.domain = domain
        self.ref = ref

    def prepare(self, n, t0, t1, domain, rng):
        if self.u0.shape[0] == 1:
            self.u0 = np.repeat(self.u0, n, axis=0)
        self.u0 = self.u0 / np.linalg.norm(self.u0, axis=-1, keepdims=True)
        self.frozen = np.zeros(n, dtype=bool)
        self.best = None
        self.start = None

    def directions(self, t, x):
        if self.start is None:
            self.start = x.copy()
        return np.where(self.frozen[:, None], 0.0, self.u0)

    def after_step(self, t, x):
        if self.start is None:
            self.start = x.copy()
            return
        dist = np.atleast_1d(ref_distance(self.domain, self.ref, self.start, x))
        if self.best is None:
            self.best = dist
            return
        self.frozen |= dist < self.best - 1e-12
        self.best = np.maximum(self.best, dist)


@dataclass(frozen=True)
class CausalCurve:
    """Graph-parametrized causal curve t -> (t, k(t)) with speed certificates."""

    times: np.ndarray  # (m,)
    points: np.ndarray  # (m, d)
    direction: str  # "future" or "past"
    max_speed_ratio: float  # max over steps of g(kdot,kdot) / lambda
    truncated: bool = False
    policy: str = "constant"

    @property
    def start(self):
        return float(self.times[0]), self.points[0]

    @property
    def end(self):
        return float(self.times[-1]), self.points[-1]


def _integrate_bundle(m, t0, x0, policy, t_end, step, record_every=1):
    """Classical RK4 on dk/dt = sigma(t,k) u(t,k) for a bundle of curves.

    sigma = sqrt(lambda / g(u,u)) makes each velocity null, so the speed
    certificate g(kdot,kdot) <= lambda holds with equality up to integration
    error.  Fixed step; global error O(step^4).
    """
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    n = x0.shape[0]
    truncated = False
    lo, hi = m.window
    t_stop = float(np.clip(t_end, lo, hi))
    if t_stop != t_end:
        truncated = True
    span = t_stop - t0
    if span == 0.0:
        lam, g = m.eval(np.full(n, t0), x0, check=True)
        return (
            np.array([t0]),
            x0[None, :, :],
            np.zeros(n),
            truncated,
        )
    n_steps = max(1, int(round(abs(span) / step)))
    dt = span / n_steps

    def rhs(t, x):
        tb = np.full(n, t)
        lam, g = m.eval(tb, x, check=False)
        u = np.asarray(policy.directions(t, x), dtype=float)
        guu = np.einsum("ni,nij,nj->n", u, g, u)
        sigma = np.sqrt(np.where(guu > 0, lam / np.where(guu > 0, guu, 1.0), 0.0))
        return sigma[:, None] * u

    times = [t0]
    xs = [x0.copy()]
    max_ratio = np.zeros(n)
    x = x0.copy()
    t = t0
    policy.after_step(t, x)
    for i in range(n_steps):
        k1 = rhs(t, x)
        k2 = rhs(t + dt / 2, x + dt / 2 * k1)
        k3 = rhs(t + dt / 2, x + dt / 2 * k2)
        k4 = rhs(t + dt, x + dt * k3)
        v = (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        x_prev = x
        x = x + dt * v
        t = t0 + (i + 1) * dt
        policy.after_step(t, x)
        # speed certificate for the step-average velocity, measured at the
        # step midpoint so the bias is O(step^2) rather than O(step)
        lam, g = m.eval(
            np.full(n, t - dt / 2), (x_prev + x) / 2, check=False
        )
        gvv = np.einsum("ni,nij,nj->n", v, g, v)
        max_ratio = np.maximum(max_ratio, gvv / lam)
        if (i + 1) % record_every == 0 or i + 1 == n_steps:
            times.append(t)
            xs.append(x.copy())
    return np.asarray(times), np.stack(xs), max_ratio, truncated


def integrate_causal_curve(m, start, direction, t_end, step):
    """Integrate one extremal (null) causal curve from start to t = t_end.

    ``direction`` is either a fixed spatial direction vector or a direction
    policy object.  Leaving the validity window truncates the curve and sets
    its flag.
    """
    if step <= 0:
        raise DomainError("step must be positive")
    t0, x0 = float(start[0]), np.atleast_1d(np.asarray(start[1], dtype=float))
    policy = direction
    if not hasattr(policy, "directions"):
        policy = ConstantDirection(np.asarray(direction, dtype=float))
    policy.prepare(1, t0, t_end, m.domain, None)
    times, xs, ratios, truncated = _integrate_bundle(
        m, t0, x0.reshape(1, -1), policy, t_end, step, record_every=10
    )
    return CausalCurve(
        times=times,
        points=xs[:, 0, :],
        direction="future" if t_end >= t0 else "past",
        max_speed_ratio=float(ratios[0]),
        truncated=truncated,
        policy=policy.name,
    )


# ---------------------------------------------------------------------------
# verifiers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckReport:
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ConeContainmentReport:
    """Outcome of sampling extremal curves against the reachable-ball bound."""

    passed: bool
    worst_margin: float  # min over curves of |t_start| - arrival distance
    n_curves: int
    witness: CausalCurve | None = None
    detail: str = ""


def verify_cone_containment(
    m: MetricField,
    j: ScalarField,
    g0: SpdField,
    n_samples: int,
    seed: int,
    t_start_range: tuple[float, float] = (-2.0, -0.5),
    tol: float = 1e-4,
    step: float = 1e-3,
) -> ConeContainmentReport:
    """Launch seeded extremal causal curves from t < 0 and check that each
    arrives at t = 0 within j g_0 distance |t_start| + tol of its start."""
    rng = np.random.default_rng(seed)
    domain = m.domain
    d = domain.dimension
    ref = _reference(domain, j, g0)
    lo, hi = t_start_range
    if lo > hi or hi > 0:
        raise DomainError("t_start_range must satisfy lo <= hi < 0 or hi == 0")

    raw = rng.standard_normal((n_samples, d))
    dirs = raw / np.linalg.norm(raw, axis=-1, keepdims=True)
    starts_x = rng.uniform(0.0, 1.0, (n_samples, d)) * np.asarray(domain.circumferences)
    starts_t = rng.uniform(lo, hi, n_samples) if lo < hi else np.full(n_samples, lo)

    policies = [
        ("constant", lambda u: ConstantDirection(u)),
        ("piecewise_random", lambda u: PiecewiseRandomDirection(seed=seed + 1)),
        ("eigen", lambda u: EigenDirection(m, ref)),
        ("hold_at_max", lambda u: HoldAtMaxDirection(u, domain, ref)),
    ]

    worst = INF
    witness = None
    n_groups = len(policies)
    for gi, (pname, make) in enumerate(policies):
        idx = np.arange(gi, n_samples, n_groups)
        if idx.size == 0:
            continue
        # share one launch time per policy group so the bundle integrates on a
        # common time grid; the group's earliest sampled start is used
        t0 = float(np.min(starts_t[idx]))
        x0 = starts_x[idx]
        policy = make(dirs[idx])
        policy.prepare(idx.size, t0, 0.0, domain, rng)
        times, xs, ratios, _ = _integrate_bundle(m, t0, x0, policy, 0.0, step)
        dist = np.atleast_1d(ref_distance(domain, ref, x0, xs[-1]))
        margin = abs(t0) - dist
        i = int(np.argmin(margin))
        if margin[i] < worst:
            worst = float(margin[i])
            if margin[i] < -tol:
                witness = CausalCurve(
                    times=times,
                    points=xs[:, i, :],
                    direction="future",
                    max_speed_ratio=float(ratios[i]),
                    policy=pname,
                )
    passed = worst >= -tol
    detail = "" if passed else (
        f"curve ({witness.policy}) from t={witness.times[0]:.4g}, "
        f"x={witness.points[0].tolist()} arrived at distance exceeding the "
        f"bound by {-worst:.4g}"
    )
    return ConeContainmentReport(passed, worst, n_samples, witness, detail)


def _reference(domain, j, g0) -> SpdField:
    def fn(x):
        jv = np.asarray(j.fn(np.zeros(x.shape[0]), x), dtype=float)
        jv = np.broadcast_to(jv, (x.shape[0],))
        return jv[:, None, None] * np.asarray(g0.fn(x), dtype=float)

    return SpdField(domain, fn)


@dataclass(frozen=True)
class GhCertificate:
    """Per-slab table of sup-over-space maximal coordinate speeds."""

    slabs: tuple  # ((t_lo, t_hi, sup_speed), ...)
    ref_id: str
    passed: bool
    detail: str = ""


def verify_global_hyperbolicity(
    m: MetricField,
    ref: SpdField,
    t_window: tuple[float, float] = (-3.0, 3.0),
    slab: float = 1.0,
    n_t_per_slab: int = 9,
    ref_id: str = "j*g0",
) -> GhCertificate:
    """Certify global hyperbolicity via finite per-slab speed bounds.

    With a complete reference metric, a finite sup of the reference speed on
    every unit time slab bounds the spatial excursion of every causal curve
    over any compact time interval, which is the sufficient criterion used
    throughout.
    """
    pts = m.domain.grid_points()
    t_lo, t_hi = float(t_window[0]), float(t_window[1])
    edges = np.arange(t_lo, t_hi + slab / 2, slab)
    rows = []
    ok = True
    detail = ""
    refv = np.asarray(ref.fn(pts), dtype=float)
    for a, b in zip(edges[:-1], edges[1:]):
        bound = 0.0
        for t in np.linspace(a, b, n_t_per_slab):
            tb = np.full(pts.shape[0], t)
            lam, g = m.eval(tb, pts)
            speeds = np.sqrt(lam * gen_max_eig_batch(g, refv))
            bound = max(bound, float(np.max(speeds)))
        rows.append((float(a), float(b), bound))
        if not np.isfinite(bound):
            ok = False
            detail = f"unbounded reference speed on slab [{a}, {b}]"
    return GhCertificate(tuple(rows), ref_id, ok, detail)


@dataclass(frozen=True)
class DiamondReport:
    """Sampled extent of the causal diamond D(p, q)."""

    p: tuple
    q: tuple
    max_radius: float
    per_slice: tuple  # ((t, radius), ...)
    bounded: bool
    comparison: str = "slice"


def causal_diamond_extent(
    m: MetricField,
    p,
    q,
    budget: int = 33,
    k0: SpdField | None = None,
    k1: SpdField | None = None,
) -> DiamondReport:
    """Bound the causal diamond by intersecting forward and backward
    reachable-radius estimates per time slice.

    When the endpoints fit one of the covering halves t < 2/3 or t > 1/3 and
    the corresponding frozen spatial form is supplied, the comparison metric
    (1 - theta(2/3)) k0 resp. theta(1/3) k1 is used and recorded.
    """
    t_p, x_p = float(p[0]), np.atleast_1d(np.asarray(p[1], dtype=float))
    t_q, x_q = float(q[0]), np.atleast_1d(np.asarray(q[1], dtype=float))
    if t_p > t_q:
        raise OrderError(f"p at t={t_p} does not causally precede q at t={t_q}")
    if t_p == t_q:
        return DiamondReport(
            (t_p, x_p.tolist()), (t_q, x_q.tolist()), 0.0, ((t_p, 0.0),), True
        )
    comparison = "slice"
    if t_q < 2.0 / 3.0 and k0 is not None:
        ref = k0.scaled(1.0 - smooth_unit_step(2.0 / 3.0))
        comparison = "(1-theta(2/3))*k0"
    elif t_p > 1.0 / 3.0 and k1 is not None:
        ref = k1.scaled(smooth_unit_step(1.0 / 3.0))
        comparison = "theta(1/3)*k1"
    else:
        ref = m.spatial_slice(t_p)
    pts = m.domain.grid_points()
    refv = np.asarray(ref.fn(pts), dtype=float)
    ts = np.linspace(t_p, t_q, max(3, budget))
    sup = np.empty(ts.size)
    for i, t in enumerate(ts):
        tb = np.full(pts.shape[0], t)
        lam, g = m.eval(tb, pts)
        sup[i] = float(np.max(np.sqrt(lam * gen_max_eig_batch(g, refv))))
    dt = ts[1] - ts[0]
    fwd = np.concatenate([[0.0], np.cumsum((sup[:-1] + sup[1:]) / 2 * dt)])
    bwd = fwd[-1] - fwd
    radius = np.minimum(fwd, bwd)
    bounded = bool(np.all(np.isfinite(radius)))
    return DiamondReport(
        (t_p, x_p.tolist()),
        (t_q, x_q.tolist()),
        float(np.max(radius)),
        tuple((float(t), float(r)) for t, r in zip(ts, radius)),
        bounded,
        comparison,
    )


def check_ultrastatic_report(
    m: MetricField, window: tuple[float, float], tol: float, n_t: int = 9
) -> CheckReport:
    """Unit lapse and time-independent spatial form across window samples."""
    lo = max(window[0], m.window[0])
    hi = min(window[1], m.window[1])
    if hi < lo:
        raise DomainError("check window outside metric validity window")
    pts = m.domain.grid_points()
    ref_g = None
    for t in np.linspace(lo, hi, n_t):
        tb = np.full(pts.shape[0], t)
        lam, g = m.eval(tb, pts, check=False)
        scale = max(float(np.max(np.abs(g))), 1.0)
        if np.max(np.abs(lam - 1.0)) > tol:
            i = int(np.argmax(np.abs(lam - 1.0)))
            return CheckReport(
                False, f"lapse {lam[i]!r} differs from 1 at t={t}, x={pts[i].tolist()}"
            )
        if ref_g is None:
            ref_g = g
        elif np.max(np.abs(g - ref_g)) > tol * scale:
            return CheckReport(
                False, f"spatial form varies in time by {np.max(np.abs(g - ref_g)):.3e} at t={t}"
            )
    return CheckReport(True)


def check_ultrastatic(m: MetricField, window, tol: float) -> bool:
    return check_ultrastatic_report(m, window, tol).passed


def check_isometry_report(
    a: MetricField,
    b: MetricField,
    window: tuple[float, float],
    shift: float,
    tol: float,
    n_t: int = 9,
) -> CheckReport:
    """Identity-chart comparison: a at (t, x) versus b at (t + shift, x)."""
    ts = np.linspace(window[0], window[1], n_t)
    dev, where = max_metric_deviation(a, b, ts, shift=shift)
    if dev > tol:
        return CheckReport(
            False,
            f"max relative deviation {dev:.3e} > tol {tol:.3e} at t={where[0]}, x={where[1]}",
        )
    return CheckReport(True)


def check_isometry_window(a, b, window, shift, tol) -> bool:
    return check_isometry_report(a, b, window, shift, tol).passed


def verify_convex_bound(
    metric: MetricField,
    k0: SpdField,
    k1: SpdField,
    tol: float = 1e-12,
    n_t: int = 25,
) -> CheckReport:
    """Comparison-metric bounds for the convex ultrastatic interpolation:
    k_theta(t) dominates (1-theta(2/3)) k0 for t <= 2/3 and theta(1/3) k1 for
    t >= 1/3, so each covering half has a complete uniform lower bound."""
    pts = metric.domain.grid_points()
    k0v = np.asarray(k0.fn(pts), dtype=float)
    k1v = np.asarray(k1.fn(pts), dtype=float)
    c0 = 1.0 - smooth_unit_step(2.0 / 3.0)
    c1 = smooth_unit_step(1.0 / 3.0)
    for ts, comp, cv, tag in (
        (np.linspace(-0.5, 2.0 / 3.0, n_t), k0v, c0, "(1-theta(2/3))*k0"),
        (np.linspace(1.0 / 3.0, 1.5, n_t), k1v, c1, "theta(1/3)*k1"),
    ):
        for t in ts:
            tb = np.full(pts.shape[0], t)
            _, g = metric.eval(tb, pts, check=False)
            ev = np.linalg.eigvalsh(g - cv * comp)[..., 0]
            if np.min(ev) < -tol:
                i = int(np.argmin(ev))
                return CheckReport(
                    False,
                    f"k_theta - {tag} has eigenvalue {ev[i]:.3e} at t={t}, "
                    f"x={pts[i].tolist()}",
                )
    return CheckReport(True)
