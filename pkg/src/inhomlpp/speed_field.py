"""Macroscopic speed functions c(x, y) and their discontinuity curves.

Every field is a frozen dataclass; all methods are pure. A field takes one of
finitely many constant values on open regions. On a discontinuity curve it
takes the minimum of the adjacent values, which makes it lower semicontinuous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar, NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, SpecError, UnsupportedFieldError

TOL_REGION = 1e-9
DEFAULT_EXTENT = 1000.0


class CurveDescriptor(NamedTuple):
    kind: str  # "line" or "graph"
    slope: float = math.nan
    intercept: float = math.nan
    domain: tuple[float, float] = (0.0, math.inf)


class OrderExponents(NamedTuple):
    """Growth data of f' at both ends of its domain.

    ``alpha``/``c_alpha`` describe ``a**alpha * |f'(a)| -> c_alpha`` as a -> 0,
    ``beta``/``eta_beta`` describe ``|f'(a)| / (a0 - a)**beta -> eta_beta`` as
    a -> a0.  ``f0`` and ``a0`` are the curve's axis intercepts.
    """

    alpha: float
    beta: float
    c_alpha: float
    eta_beta: float
    f0: float
    a0: float


@dataclass(frozen=True, kw_only=True)
class SpeedField:
    """Base class. ``bbox`` is (xmin, ymin, xmax, ymax)."""

    bbox: tuple[float, float, float, float] = (0.0, 0.0, DEFAULT_EXTENT, DEFAULT_EXTENT)

    family: ClassVar[str] = ""

    def __post_init__(self):
        x0, y0, x1, y1 = self.bbox
        if not (0.0 <= x0 < x1 and 0.0 <= y0 < y1):
            raise SpecError(f"invalid bbox {self.bbox}")

    # -- geometry ---------------------------------------------------------
    def _check_bbox(self, x, y):
        x0, y0, x1, y1 = self.bbox
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        bad = (x < x0 - TOL_REGION) | (x > x1 + TOL_REGION) | (y < y0 - TOL_REGION) | (y > y1 + TOL_REGION)
        bad |= ~np.isfinite(x) | ~np.isfinite(y)
        if np.any(bad):
            idx = np.argmax(np.broadcast_to(bad, np.broadcast(x, y).shape))
            xb = np.broadcast_to(x, bad.shape).flat[idx]
            yb = np.broadcast_to(y, bad.shape).flat[idx]
            raise DomainError(f"point ({xb}, {yb}) outside field bbox {self.bbox}")
        return x, y

    def rates(self, x, y) -> np.ndarray:
        """Vectorised c(x, y)."""
        x, y = self._check_bbox(x, y)
        return self._rates(x, y)

    def evaluate(self, x: float, y: float) -> float:
        return float(self.rates(x, y))

    def _rates(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _rate_at(self, x: float, y: float) -> float:
        """Scalar c(x, y) without the bbox check; same rule as ``_rates``."""
        return float(self._rates(np.array([x]), np.array([y]))[0])

    def rate_bounds(self) -> tuple[float, float]:
        """(r_low, r_high) over the bbox, computed from the parameters."""
        raise NotImplementedError

    def curve(self) -> Optional[CurveDescriptor]:
        return None

    def segment_breaks(self, p, q) -> list[float]:
        """Parameters t in (0, 1) where the segment p + t (q - p) changes region."""
        return []

    def spec(self) -> str:
        raise NotImplementedError

    def _bbox_spec(self) -> str:
        x0, y0, x1, y1 = self.bbox
        if (x0, y0, x1, y1) == (0.0, 0.0, DEFAULT_EXTENT, DEFAULT_EXTENT):
            return ""
        return f",xmax={x1!r},ymax={y1!r}"


@dataclass(frozen=True, kw_only=True)
class Constant(SpeedField):
    r: float = 1.0
    family: ClassVar[str] = "constant"

    def __post_init__(self):
        super().__post_init__()
        if not self.r > 0:
            raise SpecError(f"constant rate must be positive, got {self.r}")

    def _rates(self, x, y):
        return np.full(np.broadcast(x, y).shape, float(self.r))

    def _rate_at(self, x, y):
        return float(self.r)

    def rate_bounds(self):
        return (self.r, self.r)

    def spec(self):
        return f"constant:r={self.r!r}" + self._bbox_spec()


@dataclass(frozen=True, kw_only=True)
class ShiftedTwoPhase(SpeedField):
    """Rate 1 above the line y = x - lam, rate r on and below it."""

    r: float
    lam: float = 0.0
    family: ClassVar[str] = "two-phase"

    def __post_init__(self):
        super().__post_init__()
        if not 0.0 < self.r < 1.0:
            raise SpecError(f"two-phase rate must lie in (0, 1), got {self.r}")
        if not self.lam >= 0.0:
            raise SpecError(f"two-phase shift must be >= 0, got {self.lam}")

    def _rates(self, x, y):
        d = y - (x - self.lam)
        lo = min(1.0, self.r)
        return np.where(d > TOL_REGION, 1.0, np.where(d < -TOL_REGION, self.r, lo))

    def _rate_at(self, x, y):
        d = y - (x - self.lam)
        if d > TOL_REGION:
            return 1.0
        return float(self.r) if d < -TOL_REGION else min(1.0, self.r)

    def rate_bounds(self):
        return (min(1.0, self.r), max(1.0, self.r))

    def curve(self):
        return CurveDescriptor("line", 1.0, -self.lam, (self.lam, math.inf))

    def segment_breaks(self, p, q):
        d0 = p[1] - p[0] + self.lam
        d1 = q[1] - q[0] + self.lam
        if (d0 > TOL_REGION and d1 < -TOL_REGION) or (d0 < -TOL_REGION and d1 > TOL_REGION):
            return [d0 / (d0 - d1)]
        return []

    def spec(self):
        return f"two-phase:r={self.r!r},lambda={self.lam!r}" + self._bbox_spec()


@dataclass(frozen=True, kw_only=True)
class CornerField(SpeedField):
    """Rate 1 strictly below the graph of a convex decreasing f, rate r above.

    f maps [0, a0] onto [0, f0]. Points with x > a0 belong to the r-region.
    """

    r: float

    def __post_init__(self):
        super().__post_init__()
        if not self.r > 0:
            raise SpecError(f"corner rate must be positive, got {self.r}")

    @property
    def a0(self) -> float:
        raise NotImplementedError

    @property
    def f0(self) -> float:
        raise NotImplementedError

    def f(self, a):
        raise NotImplementedError

    def _f_scalar(self, a: float) -> float:
        return float(self.f(a))

    def fprime(self, a):
        raise NotImplementedError

    def finv(self, b):
        """Inverse of f on [0, f0]."""
        raise NotImplementedError

    def order_exponents(self) -> OrderExponents:
        raise NotImplementedError

    def _rates(self, x, y):
        a0 = self.a0
        xc = np.clip(x, 0.0, a0)
        d = y - self.f(xc)
        inside = x <= a0
        lo = min(1.0, self.r)
        out = np.full(np.broadcast(x, y).shape, float(self.r))
        out = np.where(inside & (d < -TOL_REGION), 1.0, out)
        near_end = (x > a0) & (x <= a0 + TOL_REGION) & (np.abs(y) <= TOL_REGION)
        on = (inside & (np.abs(d) <= TOL_REGION)) | near_end
        return np.where(on, lo, out)

    def _rate_at(self, x, y):
        a0 = self.a0
        if x <= a0:
            d = y - self._f_scalar(min(max(x, 0.0), a0))
            if abs(d) <= TOL_REGION:
                return min(1.0, self.r)
            return 1.0 if d < 0 else float(self.r)
        if x <= a0 + TOL_REGION and abs(y) <= TOL_REGION:
            return min(1.0, self.r)
        return float(self.r)

    def rate_bounds(self):
        return (min(1.0, self.r), max(1.0, self.r))

    def curve(self):
        return CurveDescriptor("graph", domain=(0.0, self.a0))

    def below_curve(self, x: float, y: float) -> bool:
        """True when (x, y) lies in the closed rate-1 side (y <= f(x), x <= a0)."""
        return x <= self.a0 and y <= float(self.f(min(max(x, 0.0), self.a0))) + TOL_REGION

    def segment_breaks(self, p, q):
        a0 = self.a0
        px, py = p
        dx, dy = q[0] - px, q[1] - py
        if dx < 0 or dy < 0:
            return []

        def h(t):
            x = px + t * dx
            y = py + t * dy
            fx = self._f_scalar(min(max(x, 0.0), a0)) if x <= a0 else 0.0
            return y - fx

        out = []
        h0, h1 = h(0.0), h(1.0)
        if h0 < -TOL_REGION and h1 > TOL_REGION:
            out.append(brentq(h, 0.0, 1.0, xtol=1e-15, rtol=1e-15, maxiter=200))
        if dx > 0 and px < a0 < px + dx:
            out.append((a0 - px) / dx)
        return sorted(t for t in out if 0.0 < t < 1.0)


@dataclass(frozen=True, kw_only=True)
class CornerPower(CornerField):
    """f(x) = (c - x**(b/k))**k on [0, c**(k/b)], with 0 < b < k."""

    c: float
    b: float
    k: float
    family: ClassVar[str] = "corner-power"

    def __post_init__(self):
        super().__post_init__()
        if not (self.c > 0 and self.b > 0 and self.k > 0):
            raise SpecError("corner-power needs c, b, k > 0")
        if not self.b < self.k:
            raise SpecError(f"corner-power needs b < k, got b={self.b}, k={self.k}")

    @property
    def a0(self):
        return self.c ** (self.k / self.b)

    @property
    def f0(self):
        return self.c**self.k

    def f(self, a):
        u = np.maximum(self.c - np.power(a, self.b / self.k), 0.0)
        return np.power(u, self.k)

    def _f_scalar(self, a):
        return max(self.c - a ** (self.b / self.k), 0.0) ** self.k

    def fprime(self, a):
        e = self.b / self.k
        u = np.maximum(self.c - np.power(a, e), 0.0)
        return -self.b * np.power(a, e - 1.0) * np.power(u, self.k - 1.0)

    def finv(self, b):
        u = np.maximum(self.c - np.power(np.maximum(b, 0.0), 1.0 / self.k), 0.0)
        return np.power(u, self.k / self.b)

    def order_exponents(self):
        b, k, c = self.b, self.k, self.c
        a0 = self.a0
        eta = b * (b / k) ** (k - 1.0) * a0 ** (b - k)
        return OrderExponents(1.0 - b / k, k - 1.0, b * c ** (k - 1.0), eta, self.f0, a0)

    def spec(self):
        return f"corner-power:c={self.c!r},b={self.b!r},k={self.k!r},r={self.r!r}" + self._bbox_spec()


@dataclass(frozen=True, kw_only=True)
class CornerSqrt(CornerField):
    """f(x) = (1 - sqrt(x))**2 on [0, 1]; the curve sqrt(x) + sqrt(y) = 1."""

    family: ClassVar[str] = "corner-sqrt"

    @property
    def a0(self):
        return 1.0

    @property
    def f0(self):
        return 1.0

    def f(self, a):
        return np.square(np.maximum(1.0 - np.sqrt(a), 0.0))

    def _f_scalar(self, a):
        return max(1.0 - math.sqrt(a), 0.0) ** 2

    def fprime(self, a):
        s = np.sqrt(a)
        return -(1.0 - s) / s

    def finv(self, b):
        return np.square(np.maximum(1.0 - np.sqrt(np.maximum(b, 0.0)), 0.0))

    def order_exponents(self):
        return OrderExponents(0.5, 1.0, 1.0, 0.5, 1.0, 1.0)

    def spec(self):
        return f"corner-sqrt:r={self.r!r}" + self._bbox_spec()


@dataclass(frozen=True, kw_only=True)
class StepGrid(SpeedField):
    """Piecewise-constant rates on a rectangular grid.

    Cells are half-open [x_i, x_{i+1}) x [y_j, y_{j+1}); shared edges and
    corners take the minimum over the adjacent cells. ``cell_rates[j][i]`` is
    the rate of the cell in column i, row j.
    """

    x_edges: tuple[float, ...]
    y_edges: tuple[float, ...]
    cell_rates: tuple[tuple[float, ...], ...]
    bbox: tuple[float, float, float, float] = field(default=None)  # type: ignore[assignment]
    family: ClassVar[str] = "step-grid"

    def __post_init__(self):
        xe = tuple(float(v) for v in self.x_edges)
        ye = tuple(float(v) for v in self.y_edges)
        rates = tuple(tuple(float(v) for v in row) for row in self.cell_rates)
        if len(xe) < 2 or len(ye) < 2 or any(b <= a for a, b in zip(xe, xe[1:])) or any(b <= a for a, b in zip(ye, ye[1:])):
            raise SpecError("step-grid edges must be strictly increasing with at least two entries")
        if len(rates) != len(ye) - 1 or any(len(row) != len(xe) - 1 for row in rates):
            raise SpecError("step-grid cell_rates shape does not match edges")
        if any(not v > 0 for row in rates for v in row):
            raise SpecError("step-grid rates must be positive")
        object.__setattr__(self, "x_edges", xe)
        object.__setattr__(self, "y_edges", ye)
        object.__setattr__(self, "cell_rates", rates)
        object.__setattr__(self, "bbox", (xe[0], ye[0], xe[-1], ye[-1]))
        super().__post_init__()

    def _rates(self, x, y):
        xe = np.asarray(self.x_edges)
        ye = np.asarray(self.y_edges)
        table = np.asarray(self.cell_rates)
        nx, ny = len(xe) - 1, len(ye) - 1
        x, y = np.broadcast_arrays(x, y)
        best = None
        # Check the cell containing the point plus neighbours across any edge
        # within tolerance, then take the minimum.
        for ox in (-TOL_REGION, 0.0, TOL_REGION):
            for oy in (-TOL_REGION, 0.0, TOL_REGION):
                ix = np.clip(np.searchsorted(xe, x + ox, side="right") - 1, 0, nx - 1)
                iy = np.clip(np.searchsorted(ye, y + oy, side="right") - 1, 0, ny - 1)
                v = table[iy, ix]
                best = v if best is None else np.minimum(best, v)
        return np.asarray(best, dtype=float)

    def rate_bounds(self):
        flat = [v for row in self.cell_rates for v in row]
        return (min(flat), max(flat))

    def segment_breaks(self, p, q):
        out = []
        for axis, edges in ((0, self.x_edges), (1, self.y_edges)):
            d = q[axis] - p[axis]
            if d <= 0:
                continue
            for e in edges[1:-1]:
                t = (e - p[axis]) / d
                if 0.0 < t < 1.0:
                    out.append(t)
        return sorted(set(out))

    def spec(self):
        xs = "|".join(repr(v) for v in self.x_edges)
        ys = "|".join(repr(v) for v in self.y_edges)
        rs = "|".join(repr(v) for row in self.cell_rates for v in row)
        return f"step-grid:xs={xs},ys={ys},rates={rs}"


# -- module-level operations --------------------------------------------------


def evaluate(field: SpeedField, x: float, y: float) -> float:
    """c(x, y), with the min rule on discontinuity curves."""
    return field.evaluate(x, y)


def discretised_mean(field: SpeedField, n: int, i: int, j: int) -> float:
    """Mean of the site weight at lattice point (i, j) for scale n: 1 / c(i/n, j/n)."""
    if n < 1 or i < 0 or j < 0:
        raise DomainError(f"need n >= 1 and i, j >= 0; got n={n}, i={i}, j={j}")
    return 1.0 / field.evaluate(i / n, j / n)


def _corner(field: SpeedField) -> CornerField:
    if not isinstance(field, CornerField):
        raise UnsupportedFieldError(f"{field.family or type(field).__name__} has no corner curve f")
    return field


def f_eval(field: SpeedField, a: float) -> float:
    cf = _corner(field)
    if not 0.0 <= a <= cf.a0:
        raise DomainError(f"a={a} outside [0, {cf.a0}]")
    if a == 0.0:
        return cf.f0
    if a == cf.a0:
        return 0.0
    return float(cf.f(a))


def f_prime(field: SpeedField, a: float) -> float:
    cf = _corner(field)
    if not 0.0 < a < cf.a0:
        raise DomainError(f"f' is only defined on the open interval (0, {cf.a0}); got a={a}")
    return float(cf.fprime(a))


def order_exponents(field: SpeedField) -> OrderExponents:
    return _corner(field).order_exponents()


# -- spec strings -------------------------------------------------------------

_FAMILY_KEYS = {
    "constant": {"r"},
    "two-phase": {"r", "lambda"},
    "corner-power": {"c", "b", "k", "r"},
    "corner-sqrt": {"r"},
    "step-grid": {"xs", "ys", "rates"},
}
_BBOX_KEYS = {"xmax", "ymax"}


def _floats(text: str, key: str) -> list[float]:
    try:
        return [float(v) for v in text.split("|")]
    except ValueError:
        raise SpecError(f"bad numeric list for {key!r}: {text!r}") from None


def parse_field(spec: str) -> SpeedField:
    """Parse ``family:key=value,...`` into a field.

    >>> parse_field("two-phase:r=0.5,lambda=1")
    ShiftedTwoPhase(bbox=(0.0, 0.0, 1000.0, 1000.0), r=0.5, lam=1.0)
    """
    if not isinstance(spec, str) or ":" not in spec:
        raise SpecError(f"field spec must look like 'family:key=value,...', got {spec!r}")
    family, _, body = spec.strip().partition(":")
    family = family.strip().lower()
    if family not in _FAMILY_KEYS:
        raise SpecError(f"unknown field family {family!r}; expected one of {sorted(_FAMILY_KEYS)}")
    kv: dict[str, str] = {}
    for part in filter(None, (p.strip() for p in body.split(","))):
        key, eq, value = part.partition("=")
        key = key.strip().lower()
        if not eq or not value.strip():
            raise SpecError(f"expected key=value, got {part!r}")
        if key in kv:
            raise SpecError(f"duplicate key {key!r}")
        kv[key] = value.strip()
    allowed = _FAMILY_KEYS[family] | (_BBOX_KEYS if family != "step-grid" else set())
    unknown = set(kv) - allowed
    if unknown:
        raise SpecError(f"unknown key(s) {sorted(unknown)} for {family}")

    if family == "step-grid":
        missing = _FAMILY_KEYS[family] - set(kv)
        if missing:
            raise SpecError(f"step-grid missing {sorted(missing)}")
        xs, ys = _floats(kv["xs"], "xs"), _floats(kv["ys"], "ys")
        flat = _floats(kv["rates"], "rates")
        nx, ny = len(xs) - 1, len(ys) - 1
        if nx < 1 or ny < 1 or len(flat) != nx * ny:
            raise SpecError("step-grid rates must list (len(xs)-1)*(len(ys)-1) values, row by row")
        rows = tuple(tuple(flat[j * nx:(j + 1) * nx]) for j in range(ny))
        return StepGrid(x_edges=tuple(xs), y_edges=tuple(ys), cell_rates=rows)

    try:
        num = {k: float(v) for k, v in kv.items()}
    except ValueError as exc:
        raise SpecError(f"non-numeric value in {spec!r}: {exc}") from None
    bbox = (0.0, 0.0, num.pop("xmax", DEFAULT_EXTENT), num.pop("ymax", DEFAULT_EXTENT))
    try:
        if family == "constant":
            return Constant(r=num.get("r", 1.0), bbox=bbox)
        if family == "two-phase":
            return ShiftedTwoPhase(r=num["r"], lam=num.get("lambda", 0.0), bbox=bbox)
        if family == "corner-power":
            return CornerPower(c=num["c"], b=num["b"], k=num["k"], r=num["r"], bbox=bbox)
        return CornerSqrt(r=num["r"], bbox=bbox)
    except KeyError as exc:
        raise SpecError(f"{family} spec is missing {exc.args[0]!r}") from None


def as_field(field_or_spec) -> SpeedField:
    if isinstance(field_or_spec, SpeedField):
        return field_or_spec
    return parse_field(field_or_spec)


def lattice_rates(field: SpeedField, n: int, i_values: Sequence[int] | np.ndarray, j: int) -> np.ndarray:
    """c(i/n, j/n) for one lattice row."""
    i_values = np.asarray(i_values, dtype=float)
    return field.rates(i_values / n, np.full_like(i_values, j / n))
