"""Homogeneous shape constant, the path functional I, and a numeric Γ_c solver.

For a polyline in a piecewise-constant field, I is the sum of
gamma(dx, dy) / rate over the maximal sub-segments that lie in one region.
Γ_c is the supremum of I over admissible (up-right) paths. Inside one region
straight segments are optimal, so the solver searches finite-dimensional
polyline families built around the discontinuity curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, LPPError
from .speed_field import (
    Constant,
    CornerField,
    ShiftedTwoPhase,
    SpeedField,
    StepGrid,
    TOL_REGION,
    as_field,
)

MAX_SPLITS = 8
TIE_TOL = 1e-9
BRANCHES = (
    "straight",
    "trapezoid",
    "two-segment",
    "crossing-C",
    "boundary-B-vertical",
    "boundary-B-horizontal",
    "polyline",
)
_INCREMENT_TOL = 1e-12


def gamma(x: float, y: float) -> float:
    """(sqrt(x) + sqrt(y))**2, the rate-one homogeneous shape."""
    if x < 0 or y < 0:
        raise DomainError(f"gamma needs x, y >= 0; got ({x}, {y})")
    return (math.sqrt(x) + math.sqrt(y)) ** 2


def gamma_homog(r: float, x: float, y: float) -> float:
    """Exact Γ for the constant field c = r."""
    if not r > 0:
        raise DomainError(f"rate must be positive, got {r}")
    return gamma(x, y) / r


@dataclass(frozen=True)
class Polyline:
    waypoints: np.ndarray
    value: Optional[float] = None

    def __post_init__(self):
        w = np.array(self.waypoints, dtype=float).reshape(-1, 2)
        if len(w) < 1:
            raise DomainError("polyline needs at least one waypoint")
        if np.any(w < -_INCREMENT_TOL) or not np.all(np.isfinite(w)):
            raise DomainError("polyline coordinates must be finite and >= 0")
        if np.any(np.diff(w, axis=0) < -_INCREMENT_TOL):
            raise DomainError("polyline increments must be nonnegative coordinatewise")
        w = np.maximum(w, 0.0)
        w.setflags(write=False)
        object.__setattr__(self, "waypoints", w)

    @property
    def start(self):
        return tuple(self.waypoints[0])

    @property
    def end(self):
        return tuple(self.waypoints[-1])

    def with_value(self, value: float) -> "Polyline":
        return Polyline(self.waypoints, float(value))

    def tolist(self):
        return [tuple(map(float, p)) for p in self.waypoints]


@dataclass
class ShapeEval:
    value: float
    maximiser: Polyline
    branch: str
    residuals: dict = field(default_factory=dict)
    non_unique: bool = False
    crossing: Optional[tuple[float, float]] = None
    candidates: list = field(default_factory=list)


def _as_polyline(p) -> Polyline:
    return p if isinstance(p, Polyline) else Polyline(p)


def functional_I(field: SpeedField, p, max_splits: int = MAX_SPLITS) -> float:
    """Line integral of gamma(x') / c(x) along an admissible polyline."""
    field = as_field(field)
    w = _as_polyline(p).waypoints
    field._check_bbox(w[:, 0], w[:, 1])
    return _integral(field, w.tolist(), max_splits)


def _integral(field: SpeedField, w: list, max_splits: int = MAX_SPLITS) -> float:
    """functional_I on a pre-validated list of waypoints."""
    weights, mx, my = [], [], []
    for k in range(len(w) - 1):
        a, b = w[k], w[k + 1]
        dx, dy = max(b[0] - a[0], 0.0), max(b[1] - a[1], 0.0)
        if dx == 0.0 and dy == 0.0:
            continue
        g = (math.sqrt(dx) + math.sqrt(dy)) ** 2
        ts = field.segment_breaks((a[0], a[1]), (b[0], b[1]))
        if len(ts) > max_splits:
            raise DomainError(f"segment {k} crosses the discontinuity {len(ts)} times (> {max_splits})")
        knots = [0.0, *ts, 1.0]
        for t0, t1 in zip(knots, knots[1:]):
            if t1 <= t0:
                continue
            tm = 0.5 * (t0 + t1)
            weights.append((t1 - t0) * g)
            mx.append(a[0] + tm * dx)
            my.append(a[1] + tm * dy)
    if not weights:
        return 0.0
    if len(weights) <= 16:
        rates = [field._rate_at(px, py) for px, py in zip(mx, my)]
    else:
        rates = field._rates(np.array(mx), np.array(my)).tolist()
    total = 0.0
    for wt, rt in zip(weights, rates):
        total += wt / rt
    return total


def polyline_distance(p, q, samples: int = 257) -> float:
    """Sup distance between two up-right polylines with common endpoints.

    Up-right paths are graphs over the level s = x + y, so the two paths are
    compared at matching levels.
    """
    p, q = _as_polyline(p).waypoints, _as_polyline(q).waypoints

    def at_levels(w, s):
        lev = w.sum(axis=1)
        lev, idx = np.unique(lev, return_index=True)
        wx = w[idx, 0]
        return np.interp(s, lev, wx)

    s0 = max(p.sum(axis=1)[0], q.sum(axis=1)[0])
    s1 = min(p.sum(axis=1)[-1], q.sum(axis=1)[-1])
    if s1 <= s0:
        return float(np.max(np.abs(p[-1] - q[-1])))
    s = np.linspace(s0, s1, samples)
    dx = at_levels(p, s) - at_levels(q, s)
    # (x, s - x) parametrisation: Euclidean gap is sqrt(2) |dx|
    return float(np.max(np.abs(dx)) * math.sqrt(2.0))


# -- candidate families --------------------------------------------------------


class _Family:
    """Maps a bounded parameter vector to a polyline and a branch label."""

    dim = 0

    def build(self, theta) -> tuple[str, np.ndarray]:
        raise NotImplementedError

    def starts(self, count: int, rng: np.random.Generator) -> list[np.ndarray]:
        return []

    def excess(self, theta) -> float:
        """Distance from theta to the parameter box (0 inside)."""
        lo, hi = self.bounds()
        return sum(max(lo - v, 0.0) + max(v - hi, 0.0) for v in np.asarray(theta, float).tolist())

    def bounds(self):
        return 0.0, 1.0

    def simplex_scale(self) -> float:
        return 0.1


class _TwoPhaseFamily(_Family):
    """start -> (a, a - lam) -> (b, b - lam) -> target with lo <= a <= b <= hi."""

    dim = 2

    def __init__(self, field: ShiftedTwoPhase, s, t):
        lam = field.lam
        self.lam = lam
        self.s, self.t = s, t
        self.lo = max(lam, s[0], s[1] + lam)
        self.hi = min(t[0], t[1] + lam)

    @property
    def feasible(self):
        return self.lo <= self.hi

    def _clip(self, v):
        return min(max(v, self.lo), self.hi)

    def bounds(self):
        return self.lo, self.hi

    def build(self, theta):
        a, b = sorted((self._clip(theta[0]), self._clip(theta[1])))
        lam = self.lam
        pts = [self.s, (a, a - lam), (b, b - lam), self.t]
        branch = "trapezoid" if b - a > 1e-9 else "two-segment"
        return branch, np.array(pts, dtype=float)

    def starts(self, count, rng):
        span = self.hi - self.lo
        out = []
        m = max(int(math.ceil(math.sqrt(2 * count))), 2)
        grid = self.lo + span * (np.arange(m) + 0.5) / m
        for i in range(m):
            for j in range(i, m):
                out.append(np.array([grid[i], grid[j]]))
        rng.shuffle(out)
        out = out[:count]
        out.sort(key=lambda v: (v[0], v[1]))
        return out

    def simplex_scale(self):
        return max(self.hi - self.lo, 1e-6) / 8


class _CornerFamily(_Family):
    """start -> (a, f(a)) -> target for a in the admissible interval."""

    dim = 1

    def __init__(self, field: CornerField, s, t):
        self.field = field
        self.s, self.t = s, t
        a0, f0 = field.a0, field.f0
        lo = max(s[0], float(field.finv(min(t[1], f0))) if t[1] < f0 else 0.0)
        hi = min(t[0], a0, float(field.finv(s[1])) if s[1] > 0 else a0)
        self.lo, self.hi = lo, hi

    @property
    def feasible(self):
        return self.lo <= self.hi

    def bounds(self):
        return self.lo, self.hi

    def point(self, a):
        f = self.field
        a = min(max(a, self.lo), self.hi)
        if a <= 0.0:
            return 0.0, f.f0
        if a >= f.a0:
            return f.a0, 0.0
        return a, float(f.f(a))

    def build(self, theta):
        a, b = self.point(theta[0])
        pts = np.array([self.s, (a, b), self.t], dtype=float)
        if a == 0.0:
            branch = "boundary-B-vertical"
        elif a == self.field.a0:
            branch = "boundary-B-horizontal"
        else:
            branch = "crossing-C"
        return branch, pts

    def starts(self, count, rng):
        span = self.hi - self.lo
        return [np.array([self.lo + span * (k + 0.5) / count]) for k in range(count)]

    def simplex_scale(self):
        return max(self.hi - self.lo, 1e-9) / 16


class _FreeFamily(_Family):
    """``k`` interior waypoints, parametrised by sorted coordinate fractions."""

    def __init__(self, s, t, k):
        self.s, self.t = np.asarray(s, float), np.asarray(t, float)
        self.k = k
        self.dim = 2 * k

    @property
    def feasible(self):
        return self.k > 0

    def build(self, theta):
        u = np.clip(np.asarray(theta, float), 0.0, 1.0)
        fx = np.sort(u[: self.k])
        fy = np.sort(u[self.k:])
        d = self.t - self.s
        mid = self.s + np.stack([fx * d[0], fy * d[1]], axis=1)
        return "polyline", np.vstack([self.s, mid, self.t])

    def starts(self, count, rng):
        out = []
        for m in range(count):
            base = (np.arange(1, self.k + 1)) / (self.k + 1)
            if m == 0:
                out.append(np.concatenate([base, base]))
            else:
                out.append(rng.uniform(0.0, 1.0, size=self.dim))
        return out

    def simplex_scale(self):
        return 0.1


def _families(field: SpeedField, s, t, free_waypoints: int) -> list[_Family]:
    fams: list[_Family] = []
    if isinstance(field, ShiftedTwoPhase):
        fam = _TwoPhaseFamily(field, s, t)
        if fam.feasible:
            fams.append(fam)
    elif isinstance(field, CornerField):
        fam = _CornerFamily(field, s, t)
        if fam.feasible and field.below_curve(*s):
            fams.append(fam)
    elif isinstance(field, StepGrid):
        fams.append(_FreeFamily(s, t, max(free_waypoints, 1)))
    if free_waypoints > 0 and not isinstance(field, (StepGrid, Constant)):
        fams.append(_FreeFamily(s, t, free_waypoints))
    return fams


def _local_search(field, fam: _Family, theta0, xatol, fatol, maxiter):
    x0, y0, x1, y1 = field.bbox
    penalty = [1.0]

    def objective(theta):
        _, pts = fam.build(theta)
        w = pts.tolist()
        px, py = -math.inf, -math.inf
        for qx, qy in w:
            if qx < -1e-12 or qy < -1e-12 or qx > x1 + TOL_REGION or qy > y1 + TOL_REGION:
                return math.inf
            if qx < px - 1e-12 or qy < py - 1e-12:
                return math.inf
            px, py = qx, qy
        try:
            v = -_integral(field, w)
        except LPPError:
            return math.inf
        # parameters are clipped into the box; the exterior penalty keeps
        # the clipped region from being a plateau
        return v + penalty[0] * fam.excess(theta)

    penalty[0] = 1.0 + abs(objective(np.asarray(theta0, float)))

    scale = fam.simplex_scale()
    simplex = np.vstack([theta0] + [theta0 + scale * e for e in np.eye(fam.dim)])
    res = minimize(
        objective,
        theta0,
        method="Nelder-Mead",
        options=dict(xatol=xatol, fatol=fatol, maxiter=maxiter, initial_simplex=simplex),
    )
    return res.x


def _explain_residual(field: CornerField, a: float, target) -> Optional[float]:
    from .closed_forms import crossing_residual

    if not 0.0 < a < field.a0:
        return None
    x, y = target
    b = float(field.f(a))
    if x - a <= 0:
        return None
    m2 = (y - b) / (x - a)
    if m2 <= 0:
        return None
    return crossing_residual(field, field.r, a, m2)


def optimize_polyline(
    field,
    target: Sequence[float],
    start: Sequence[float] = (0.0, 0.0),
    free_waypoints: int = 0,
    multistart: int = 16,
    rng_seed: int = 0,
    xatol: float = 1e-10,
    fatol: float = 1e-12,
    maxiter: int = 2000,
) -> ShapeEval:
    """Best polyline value from start to target (a lower bound on Γ_c).

    Candidates: the straight segment, the family's axis/boundary routes, and
    Nelder-Mead refinements from a deterministic stratified set of starts.
    """
    field = as_field(field)
    s = (float(start[0]), float(start[1]))
    t = (float(target[0]), float(target[1]))
    if t[0] < s[0] or t[1] < s[1]:
        raise DomainError(f"target {t} is not >= start {s} coordinatewise")
    field._check_bbox(np.array([s[0], t[0]]), np.array([s[1], t[1]]))
    rng = np.random.default_rng(rng_seed)

    cands: list[tuple[float, str, np.ndarray]] = []

    def add(branch, pts):
        try:
            v = functional_I(field, pts)
        except LPPError:
            return
        cands.append((v, branch, np.asarray(pts, float)))

    add("straight", np.array([s, t]))
    for fam in _families(field, s, t, free_waypoints):
        if isinstance(fam, _CornerFamily):
            for a in (fam.lo, fam.hi):
                add(*fam.build(np.array([a])))
        elif isinstance(fam, _TwoPhaseFamily):
            for a, b in ((fam.lo, fam.lo), (fam.lo, fam.hi), (fam.hi, fam.hi)):
                add(*fam.build(np.array([a, b])))
        for theta0 in fam.starts(multistart, rng):
            theta = _local_search(field, fam, np.asarray(theta0, float), xatol, fatol, maxiter)
            add(*fam.build(theta))

    if not cands:
        raise LPPError("internal error: no admissible candidate polyline")

    # Enumeration order is fixed; the first candidate within TIE_TOL of the
    # best value wins.
    top = max(c[0] for c in cands)
    best_idx = next(k for k, c in enumerate(cands) if c[0] >= top - TIE_TOL)
    best_v, best_branch, best_pts = cands[best_idx]
    non_unique = False
    for v, br, pts in cands:
        if abs(v - top) < TIE_TOL and polyline_distance(pts, best_pts) > 1e-6:
            non_unique = True
            break

    poly = Polyline(best_pts)
    value = functional_I(field, poly)
    residuals: dict = {}
    crossing = None
    if isinstance(field, CornerField):
        if best_branch == "straight":
            ts = [u for u in field.segment_breaks(s, t) if s[0] + u * (t[0] - s[0]) < field.a0]
            a = b = None
            if ts:
                a, b = (s[0] + ts[0] * (t[0] - s[0]), s[1] + ts[0] * (t[1] - s[1]))
        else:
            a, b = best_pts[1]
        if a is not None:
            crossing = (float(a), float(b))
            if s == (0.0, 0.0):
                res = _explain_residual(field, float(a), t)
                if res is not None:
                    residuals["crossing_eq"] = res
    if isinstance(field, ShiftedTwoPhase) and best_branch in ("trapezoid", "two-segment"):
        crossing = (float(best_pts[1][0]), float(best_pts[1][1]))
    residuals["candidates"] = len(cands)
    return ShapeEval(
        value=value,
        maximiser=poly.with_value(value),
        branch=best_branch,
        residuals=residuals,
        non_unique=non_unique,
        crossing=crossing,
        candidates=[(br, v) for v, br, _ in cands],
    )
