"""Explicit shape formulas for the shifted two-phase and corner models.

Two-phase model: rate 1 above the line y = x - lam, rate r < 1 on and below it.
Corner model: rate 1 below the graph of a convex decreasing f, rate r above.
For the corner model every maximiser is 0 -> (a, f(a)) -> (x, y). The slope
m2(a) of the second segment is the positive root of a quadratic in
1 / sqrt(m2), and type-C crossings are the roots of
(y - f(a)) / (x - a) = m2(a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import bisect

from .errors import DomainError, UnsupportedFieldError
from .macro_shape import TIE_TOL, Polyline, ShapeEval, functional_I, gamma, polyline_distance
from .speed_field import (
    TOL_REGION,
    CornerField,
    OrderExponents,
    ShiftedTwoPhase,
    as_field,
)

GOLDEN_TOL = 1e-12
ROOT_GRID = 4096
ROOT_XTOL = 1e-12
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


# -- shifted two-phase model ---------------------------------------------------


@dataclass(frozen=True)
class TwoPhaseConstants:
    r: float
    lam: float
    K: float
    A: float
    D: float
    a1_star: float

    def b1_star(self, x: float, y: float) -> float:
        """Exit point (along the line) of the trapezoid maximiser for target (x, y)."""
        return 0.5 * ((x + y + self.lam) + (x - y - self.lam) * self.K)


def _check_r(r):
    if not 0.0 < r < 1.0:
        raise DomainError(f"two-phase rate must lie in (0, 1), got {r}")


def two_phase_constants(r: float, lam: float) -> TwoPhaseConstants:
    _check_r(r)
    if lam < 0:
        raise DomainError(f"shift lambda must be >= 0, got {lam}")
    s = math.sqrt(1.0 - r)
    K = math.sqrt(1.0 + r * r / (4.0 * (1.0 - r)))
    A = (1.0 + s) ** 2 / r
    D = 4.0 * lam * s / r
    return TwoPhaseConstants(r=r, lam=lam, K=K, A=A, D=D, a1_star=0.5 * lam * (K + 1.0))


def parabola_L(r: float, lam: float, x: float, y: float) -> float:
    c = two_phase_constants(r, lam)
    A, D = c.A, c.D
    return (A * x - y / A) ** 2 - 2.0 * D * (A * x + y / A) + D * D


def flat_edge_value(r: float, lam: float, x: float, y: float) -> float:
    """The linear piece (1 + A) x + (1 + 1/A) y - D of the shape."""
    c = two_phase_constants(r, lam)
    return (1.0 + c.A) * x + (1.0 + 1.0 / c.A) * y - c.D


def line_constraint(r: float, lam: float, x: float, y: float) -> bool:
    """True when the trapezoid exit point lies beyond the entry point."""
    c = two_phase_constants(r, lam)
    K = c.K
    return y <= (K + 1.0) / (K - 1.0) * x - 2.0 * K * lam / (K - 1.0)


def golden_max(fn: Callable[[float], float], lo: float, hi: float, tol: float = GOLDEN_TOL) -> float:
    """Argmax of a unimodal function on [lo, hi] by golden-section search."""
    if hi - lo <= tol:
        return 0.5 * (lo + hi)
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    # compare the bracket with the endpoints (the optimum may sit on one)
    best = max((lo, 0.5 * (a + b), hi), key=fn)
    return best


def _poly(*pts):
    return Polyline(np.array(pts, dtype=float))


def two_phase_shape(r: float, lam: float, x: float, y: float, debug: bool = False) -> ShapeEval:
    """Γ for the shifted two-phase field at target (x, y)."""
    c = two_phase_constants(r, lam)
    if x < 0 or y < 0:
        raise DomainError(f"target must be >= 0, got ({x}, {y})")
    K, a1 = c.K, c.a1_star
    d = y - x + lam
    residuals: dict = {}

    if d > TOL_REGION:
        straight = gamma(x, y)
        L = parabola_L(r, lam, x, y)
        residuals["L"] = L
        if x < a1 or L <= 0 or not line_constraint(r, lam, x, y):
            poly = _poly((0, 0), (x, y))
            non_unique = abs(L) <= 1e-9 * max(1.0, abs(straight)) and x >= a1
            return ShapeEval(straight, poly.with_value(straight), "straight", residuals, non_unique)
        value = flat_edge_value(r, lam, x, y)
        b1 = c.b1_star(x, y)
        poly = _poly((0, 0), (a1, a1 - lam), (b1, b1 - lam), (x, y))
        residuals["straight_gap"] = value - straight
        non_unique = abs(value - straight) < TIE_TOL
        return ShapeEval(value, poly.with_value(value), "trapezoid", residuals, non_unique, (a1, a1 - lam))

    if d >= -TOL_REGION:
        if x >= a1:
            value = (4.0 / r) * x + lam * (K + math.sqrt(K * K - 1.0) - (2.0 / r) * (1.0 + K))
            poly = _poly((0, 0), (a1, a1 - lam), (x, y))
            return ShapeEval(value, poly.with_value(value), "two-segment", residuals, False, (a1, a1 - lam))
        value = gamma(x, max(x - lam, 0.0))
        return ShapeEval(value, _poly((0, 0), (x, y)).with_value(value), "straight", residuals)

    # Below the line: one crossing at (a3, a3 - lam), then straight in the r-region.
    def score(a3):
        return gamma(a3, max(a3 - lam, 0.0)) + gamma(max(x - a3, 0.0), max(y - a3 + lam, 0.0)) / r

    lo, hi = lam, min(x, y + lam, a1)
    hi = max(hi, lo)
    a3 = golden_max(score, lo, hi)
    value = score(a3)
    if debug:
        full_hi = min(x, y + lam)
        grid = np.linspace(lo, full_hi, 10_000)
        grid_best = max(score(float(g)) for g in grid)
        residuals["debug_grid_gap"] = grid_best - value
    residuals["a3"] = a3
    poly = _poly((0, 0), (a3, a3 - lam), (x, y))
    return ShapeEval(value, poly.with_value(value), "two-segment", residuals, False, (a3, a3 - lam))


# -- corner model --------------------------------------------------------------


def _corner(field) -> CornerField:
    field = as_field(field)
    if not isinstance(field, CornerField):
        raise UnsupportedFieldError(f"{field.family} is not a corner field")
    return field


def _rate(field: CornerField, r: Optional[float]) -> float:
    r = field.r if r is None else float(r)
    if not r > 0:
        raise DomainError(f"rate must be positive, got {r}")
    return r


def _check_a(field: CornerField, a):
    a_arr = np.asarray(a, dtype=float)
    if np.any(~(a_arr > 0.0)) or np.any(~(a_arr < field.a0)):
        raise DomainError(f"a must lie in the open interval (0, {field.a0})")
    return a_arr


def m2_from_values(a, fa, fpa, r):
    """m2 from a, f(a), f'(a) and r (vectorised).

    With u = 1/sqrt(m2) the crossing condition is u^2 - t u + 1/f' = 0, where
    t = -1/f' - 1 + D_a. Since 1/f' < 0 there is exactly one positive root.
    """
    a, fa, fpa = np.broadcast_arrays(np.asarray(a, float), np.asarray(fa, float), np.asarray(fpa, float))
    m1 = fa / a
    inv_fp = 1.0 / fpa
    D = r * (1.0 + np.sqrt(m1)) * (1.0 / np.sqrt(m1) + inv_fp)
    t = -inv_fp - 1.0 + D
    q = -4.0 * inv_fp
    root = np.sqrt(t * t + q)
    with np.errstate(divide="ignore", invalid="ignore"):
        # t + root cancels badly for t << 0; use q / (root - t) there
        two_u = np.where(t >= 0, t + root, q / (root - t))
    return 4.0 / (two_u * two_u)


def corner_D(field, r: Optional[float], a):
    """D_a = r (1 + sqrt(f/a)) (sqrt(a/f) + 1/f')."""
    f = _corner(field)
    r = _rate(f, r)
    a = _check_a(f, a)
    fa, fpa = f.f(a), f.fprime(a)
    out = r * (1.0 + np.sqrt(fa / a)) * (np.sqrt(a / fa) + 1.0 / fpa)
    return float(out) if out.ndim == 0 else out


def corner_m2(field, r: Optional[float], a):
    f = _corner(field)
    r = _rate(f, r)
    a = _check_a(f, a)
    out = m2_from_values(a, f.f(a), f.fprime(a), r)
    return float(out) if np.ndim(out) == 0 else out


def crossing_residual(field, r: Optional[float], a: float, m2: float) -> float:
    """Left minus right side of the crossing optimality condition."""
    f = _corner(field)
    r = _rate(f, r)
    a = float(_check_a(f, a))
    if not m2 > 0:
        raise DomainError(f"m2 must be positive, got {m2}")
    m1 = float(f.f(a)) / a
    fp = float(f.fprime(a))
    sm1, sm2 = math.sqrt(m1), math.sqrt(m2)
    return (r - 1.0) / r + sm1 - sm2 / r + (fp / r) * (r - 1.0 + r / sm1 - 1.0 / sm2)


def m2_quadratic(field, r: Optional[float], a: float) -> tuple[float, float, float]:
    """Coefficients (1, -t, 1/f') of the quadratic satisfied by 1/sqrt(m2)."""
    f = _corner(field)
    r = _rate(f, r)
    a = float(_check_a(f, a))
    fa, fp = float(f.f(a)), float(f.fprime(a))
    m1 = fa / a
    D = r * (1.0 + math.sqrt(m1)) * (1.0 / math.sqrt(m1) + 1.0 / fp)
    return 1.0, -(-1.0 / fp - 1.0 + D), 1.0 / fp


@dataclass(frozen=True)
class CrossingSolution:
    a: float
    m1: float
    m2: float
    D_a: float
    residual: float
    value: float

    @property
    def point(self):
        return self.a, self.m1 * self.a


def _root_grid(lo: float, hi: float, points: int) -> np.ndarray:
    span = hi - lo
    half = max(points // 2, 2)
    off = 0.5 * span * np.logspace(-12, 0, half)
    grid = np.concatenate([lo + off, hi - off])
    grid = np.unique(grid[(grid > lo) & (grid < hi)])
    return grid


def corner_value(field: CornerField, r: float, a: float, x: float, y: float) -> float:
    """gamma(a, f(a)) + gamma(x - a, y - f(a)) / r for a in [0, a0]."""
    b = field.f0 if a <= 0 else (0.0 if a >= field.a0 else float(field.f(a)))
    return gamma(a, b) + gamma(max(x - a, 0.0), max(y - b, 0.0)) / r


def crossing_roots(field, x: float, y: float, r: Optional[float] = None, points: int = ROOT_GRID) -> list[CrossingSolution]:
    """All type-C crossings for target (x, y): roots of (y - f(a))/(x - a) = m2(a)."""
    f = _corner(field)
    r = _rate(f, r)
    a0, f0 = f.a0, f.f0
    lo = float(f.finv(y)) if y < f0 else 0.0
    hi = min(x, a0)
    if not hi > lo:
        return []
    grid = _root_grid(lo, hi, points)

    def g(a):
        a = np.asarray(a, float)
        fa = f.f(a)
        return (y - fa) / (x - a) - m2_from_values(a, fa, f.fprime(a), r)

    with np.errstate(all="ignore"):
        vals = g(grid)
    out = []
    for k in range(len(grid) - 1):
        g0, g1 = vals[k], vals[k + 1]
        if not (np.isfinite(g0) and np.isfinite(g1)):
            continue
        if g0 == 0.0:
            root = grid[k]
        elif g0 * g1 < 0:
            root = bisect(lambda t: float(g(t)), grid[k], grid[k + 1], xtol=ROOT_XTOL, rtol=8.9e-16)
        else:
            continue
        fa = float(f.f(root))
        if not (fa < y and root < x):
            continue
        m1 = fa / root
        m2 = float(m2_from_values(root, fa, f.fprime(root), r))
        out.append(
            CrossingSolution(
                a=float(root),
                m1=m1,
                m2=m2,
                D_a=float(corner_D(f, r, root)),
                residual=crossing_residual(f, r, root, m2),
                value=corner_value(f, r, root, x, y),
            )
        )
    return out


def corner_shape(field, x: float, y: float, r: Optional[float] = None, points: int = ROOT_GRID) -> ShapeEval:
    """Γ for a corner field by enumerating crossing and axis candidates."""
    f = _corner(field)
    r = _rate(f, r)
    if x < 0 or y < 0:
        raise DomainError(f"target must be >= 0, got ({x}, {y})")
    f._check_bbox(x, y)
    a0, f0 = f.a0, f.f0
    if f.below_curve(x, y):
        v = gamma(x, y)
        return ShapeEval(v, _poly((0, 0), (x, y)).with_value(v), "straight")

    cands: list[tuple[float, str, np.ndarray, dict]] = []
    for sol in crossing_roots(f, x, y, r, points):
        pts = np.array([(0, 0), sol.point, (x, y)], float)
        cands.append((sol.value, "crossing-C", pts, {"crossing_eq": sol.residual, "a": sol.a, "m2": sol.m2}))
    if y >= f0:
        cands.append((corner_value(f, r, 0.0, x, y), "boundary-B-vertical", np.array([(0, 0), (0, f0), (x, y)], float), {}))
    if x >= a0:
        cands.append((corner_value(f, r, a0, x, y), "boundary-B-horizontal", np.array([(0, 0), (a0, 0), (x, y)], float), {}))
    if not cands:
        # No sign change resolved (can only happen through rounding): take the
        # best grid point on the admissible interval.
        lo = float(f.finv(y)) if y < f0 else 0.0
        hi = min(x, a0)
        grid = np.linspace(lo, hi, points)
        best = max(grid, key=lambda a: corner_value(f, r, float(a), x, y))
        b = float(f.f(best))
        cands.append((corner_value(f, r, float(best), x, y), "crossing-C", np.array([(0, 0), (best, b), (x, y)], float), {"fallback": 1.0}))

    order = sorted(range(len(cands)), key=lambda k: -cands[k][0])
    v, branch, pts, res = cands[order[0]]
    non_unique = any(
        abs(cands[k][0] - v) < TIE_TOL and polyline_distance(cands[k][2], pts) > 1e-6 for k in order[1:]
    )
    res = dict(res)
    res["n_candidates"] = len(cands)
    poly = Polyline(pts, v)
    crossing = (float(pts[1][0]), float(pts[1][1]))
    return ShapeEval(v, poly, branch, res, non_unique, crossing, [(c[1], c[0]) for c in cands])


def corner_shape_numeric_check(field, x: float, y: float, r: Optional[float] = None, points: int = 1_000_000) -> tuple[float, float]:
    """Brute-force (value, a) over a dense grid of a in the admissible interval."""
    f = _corner(field)
    r = _rate(f, r)
    lo = float(f.finv(y)) if y < f.f0 else 0.0
    hi = min(x, f.a0)
    a = np.linspace(lo, hi, points)
    b = np.where(a <= 0, f.f0, f.f(np.clip(a, 0, f.a0)))
    v = (np.sqrt(a) + np.sqrt(b)) ** 2 + (np.sqrt(np.maximum(x - a, 0)) + np.sqrt(np.maximum(y - b, 0))) ** 2 / r
    k = int(np.argmax(v))
    return float(v[k]), float(a[k])


# -- type-B region boundary ----------------------------------------------------


def _hyper_q(f: CornerField, r: float) -> float:
    return (f.a0 - f.f0) ** 2 * (r - 1.0) ** 2 / 4.0


def region_boundary_hyperbola(field, r: Optional[float], x: float, y: float) -> float:
    """Implicit equal-value locus of the two axis routes (zero set, r > 1).

    Squaring twice introduces spurious branches; see
    :func:`hyperbola_side_conditions` for the conditions a zero must also meet.
    """
    f = _corner(field)
    r = _rate(f, r)
    if not r > 1:
        raise DomainError(f"the type-B boundary is defined for r > 1, got {r}")
    a0, f0 = f.a0, f.f0
    Q = _hyper_q(f, r)
    return f0 * f0 * x * x + a0 * a0 * y * y - 2.0 * x * y * (a0 * f0 + 2.0 * Q) + 2.0 * Q * (f0 * x + a0 * y) + Q * Q


def hyperbola_side_conditions(field, r: Optional[float], x: float, y: float, tol: float = 1e-12) -> bool:
    """Whether a zero of the implicit form is a genuine equal-value point.

    Requires both routes admissible (x >= a0, y >= f0) and the signs dropped
    by each squaring step to agree: with delta = (r - 1)(a0 - f0) / 2,
    delta + sqrt((x - a0) y) >= 0 and delta (a0 y - f0 x - delta^2) >= 0.
    """
    f = _corner(field)
    r = _rate(f, r)
    a0, f0 = f.a0, f.f0
    if x < a0 or y < f0:
        return False
    delta = (r - 1.0) * (a0 - f0) / 2.0
    if delta + math.sqrt((x - a0) * y) < -tol:
        return False
    return delta * (a0 * y - f0 * x - delta * delta) >= -tol * max(1.0, abs(delta))


def axis_routes(field, r: Optional[float], x: float, y: float) -> tuple[float, float]:
    """(horizontal route via (a0, 0), vertical route via (0, f0)) values."""
    f = _corner(field)
    r = _rate(f, r)
    return corner_value(f, r, f.a0, x, y), corner_value(f, r, 0.0, x, y)


# -- asymptotics of m2 ---------------------------------------------------------


@dataclass(frozen=True)
class M2Limit:
    status: str  # "finite", "infinite", "zero", "indeterminate"
    value: float
    note: str = ""


_EXP_TOL = 1e-12


def _origin_limit(alpha, c_alpha, f0, r, label="origin") -> M2Limit:
    if alpha <= _EXP_TOL:
        return M2Limit("infinite", math.inf, "finite slope at the end")
    if alpha > 0.5 + _EXP_TOL:
        if r > 1:
            return M2Limit("finite", 1.0 / (r - 1.0) ** 2)
        return M2Limit("infinite", math.inf)
    if abs(alpha - 0.5) <= _EXP_TOL:
        sf = math.sqrt(f0)
        if math.isfinite(c_alpha) and c_alpha > sf:
            r_c = c_alpha / (c_alpha - sf)
            if abs(r - r_c) <= 1e-12 * max(1.0, r_c):
                return M2Limit("indeterminate", math.nan, "on the alpha=1/2 phase boundary; decided by crossing-point sequences")
            if r > r_c:
                return M2Limit("finite", 1.0 / (r - 1.0 - r * sf / c_alpha) ** 2)
        return M2Limit("infinite", math.inf)
    return M2Limit("infinite", math.inf)


def classify_m2_limit(field_or_exponents, r: Optional[float] = None, end: str = "origin") -> M2Limit:
    """Predicted limit of m2(a) as a -> 0 (end="origin") or a -> a0 (end="a0").

    The a0 end is obtained by exchanging coordinates: the mirrored curve is the
    inverse function g = f^-1, whose growth exponent at 0 is beta / (beta + 1),
    and the mirrored slope is 1/m2.
    """
    if isinstance(field_or_exponents, OrderExponents):
        ex = field_or_exponents
        if r is None:
            raise DomainError("r is required when passing exponents directly")
    else:
        f = _corner(field_or_exponents)
        ex = f.order_exponents()
        r = _rate(f, r)
    if end == "origin":
        return _origin_limit(ex.alpha, ex.c_alpha, ex.f0, r)
    if end != "a0":
        raise DomainError(f"end must be 'origin' or 'a0', got {end!r}")
    beta, eta = ex.beta, ex.eta_beta
    if not math.isfinite(beta):
        alpha_g, c_g = 1.0, math.inf
    else:
        alpha_g = beta / (beta + 1.0)
        c_g = eta ** (-1.0 / (beta + 1.0)) * (beta + 1.0) ** (-beta / (beta + 1.0)) if eta > 0 else math.inf
    mirrored = _origin_limit(alpha_g, c_g, ex.a0, r)
    if mirrored.status == "infinite":
        return M2Limit("zero", 0.0, mirrored.note)
    if mirrored.status == "finite":
        return M2Limit("finite", 1.0 / mirrored.value)
    return mirrored


# -- expansion near the alpha = 1/2 phase transition ---------------------------


@dataclass(frozen=True)
class ExpansionParams:
    f0: float
    gamma_exp: float
    c: float
    r: float
    c_half: Optional[float] = None

    def __post_init__(self):
        if not self.gamma_exp > 0:
            raise DomainError(f"expansion exponent must be > 0, got {self.gamma_exp}")
        if not (self.r > 1 and self.f0 > 0):
            raise DomainError("expansion needs r > 1 and f(0) > 0")
        if self.c_half is None:
            object.__setattr__(self, "c_half", self.r * math.sqrt(self.f0) / (self.r - 1.0))

    def f(self, a):
        g = self.gamma_exp
        return self.f0 - 2.0 * self.c_half * np.sqrt(a) - self.c / (g + 0.5) * np.power(a, g + 0.5)

    def fprime(self, a):
        g = self.gamma_exp
        return -(self.c_half / np.sqrt(a) + self.c * np.power(a, g - 0.5))


@dataclass(frozen=True)
class ExpansionResult:
    a: float
    lhs: float
    leading: float
    next_order_bound: float

    @property
    def remainder(self):
        return abs(self.lhs - self.leading)


def expansion_leading(p: ExpansionParams, a: float) -> float:
    if p.gamma_exp < 0.5 and p.c != 0.0:
        return a ** (0.5 - p.gamma_exp) / (abs(p.c) * (p.r - 1.0))
    return a**0.25 / math.sqrt(p.c_half)


def expansion_check(params: ExpansionParams | dict, a: float) -> ExpansionResult:
    """1/sqrt(m2(a)) from the exact formula next to its predicted leading term."""
    p = params if isinstance(params, ExpansionParams) else ExpansionParams(**params)
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}")
    fa, fpa = float(p.f(a)), float(p.fprime(a))
    if not (fa > 0 and fpa < 0):
        raise DomainError(f"a={a} is outside the range where the expansion form is a valid corner curve")
    m2 = float(m2_from_values(a, fa, fpa, p.r))
    return ExpansionResult(a, 1.0 / math.sqrt(m2), expansion_leading(p, a), math.sqrt(a))


def remainder_slope(params: ExpansionParams | dict, a_hi: float = 1e-6, a_lo: float = 1e-8) -> float:
    """Log-log slope of |lhs - leading| between two values of a."""
    r1 = expansion_check(params, a_hi).remainder
    r2 = expansion_check(params, a_lo).remainder
    return math.log(r1 / r2) / math.log(a_hi / a_lo)


# -- uniqueness probe ----------------------------------------------------------


@dataclass
class UniquenessReport:
    kappa: float
    a_star: float
    target: tuple[float, float]
    new_target: tuple[float, float]
    selected_a: Optional[float]
    same_crossing: bool
    residual_at_a_star: float
    details: dict = field(default_factory=dict)


def uniqueness_probe(field, r: Optional[float], target, kappa: float, tol: float = 1e-8) -> UniquenessReport:
    """Move the target along the second segment of its type-C maximiser.

    For kappa < 1 the same crossing must be selected; for kappa > 1 the crossing
    is still a critical point (zero residual) but may stop being maximal.
    """
    f = _corner(field)
    r = _rate(f, r)
    x, y = map(float, target)
    if f.below_curve(x, y):
        raise DomainError(f"target {target} lies in the rate-1 region; there is no crossing")
    base = corner_shape(f, x, y, r)
    if base.branch != "crossing-C":
        raise DomainError(f"target {target} has a {base.branch} maximiser, not a type-C crossing")
    a_star, b_star = base.crossing
    nx = a_star + kappa * (x - a_star)
    ny = b_star + kappa * (y - b_star)
    moved = corner_shape(f, nx, ny, r)
    sel = moved.crossing[0] if moved.branch == "crossing-C" else None
    same = sel is not None and abs(sel - a_star) <= tol
    m2 = (ny - b_star) / (nx - a_star)
    res = crossing_residual(f, r, a_star, m2)
    return UniquenessReport(kappa, a_star, (x, y), (nx, ny), sel, same, res, {"branch": moved.branch})


def crossing_density(field, r: Optional[float], grid_sizes=(8, 16, 32), extent: float = 3.0) -> list[tuple[int, float]]:
    """Largest gap between crossing points found over target grids of growing size."""
    f = _corner(field)
    r = _rate(f, r)
    out = []
    for m in grid_sizes:
        found = [0.0, f.a0]
        xs = np.linspace(extent / m, extent, m)
        for x in xs:
            for y in xs:
                if f.below_curve(float(x), float(y)):
                    continue
                ev = corner_shape(f, float(x), float(y), r, points=1024)
                if ev.branch == "crossing-C":
                    found.append(ev.crossing[0])
        found.sort()
        out.append((m, float(np.max(np.diff(found)))))
    return out
