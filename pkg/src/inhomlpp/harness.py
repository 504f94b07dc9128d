"""Experiment orchestration: convergence tables, path overlays, m2 sweeps.

Output formats
--------------
converge CSV : model,target_x,target_y,n,replica,g_over_n,gamma_hat,abs_err,wall_ms
overlay CSV  : kind,target_x,target_y,step_index,px,py,branch
sweep CSV    : '#'-prefixed header lines with the predicted limits, then
               a,m1,m2,D_a,residual

Floats are written with 17 significant digits, '\\n' line endings.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import closed_forms as cf
from .errors import DomainError, OutputError, SpecError
from .lpp_engine import (
    DEFAULT_MAX_CELLS,
    EnvironmentSpec,
    last_passage,
    last_passage_checkpointed,
    scaled_lattice_target,
)
from .macro_shape import ShapeEval, gamma_homog, optimize_polyline
from .speed_field import Constant, CornerField, ShiftedTwoPhase, SpeedField, parse_field

CONVERGE_COLUMNS = ("model", "target_x", "target_y", "n", "replica", "g_over_n", "gamma_hat", "abs_err", "wall_ms")
OVERLAY_COLUMNS = ("kind", "target_x", "target_y", "step_index", "px", "py", "branch")
SWEEP_COLUMNS = ("a", "m1", "m2", "D_a", "residual")
EXPAND_COLUMNS = ("a", "lhs", "leading", "remainder", "next_order_bound")

_CONFIG_KEYS = {
    "field", "targets", "n_list", "replicas", "base_seed", "out_csv", "out_svg",
    "optimizer", "record_wall_ms", "workers", "block_rows",
}


@dataclass(frozen=True)
class ExperimentConfig:
    field: str
    targets: tuple[tuple[float, float], ...]
    n_list: tuple[int, ...]
    replicas: int = 5
    base_seed: int = 0
    out_csv: Optional[str] = None
    out_svg: Optional[str] = None
    optimizer: dict = field(default_factory=dict)
    record_wall_ms: bool = False
    workers: int = 1
    block_rows: int = 256

    def __post_init__(self):
        parse_field(self.field)
        if not self.targets:
            raise SpecError("config needs at least one target")
        for t in self.targets:
            if len(t) != 2 or min(t) < 0:
                raise SpecError(f"targets must be pairs of nonnegative numbers, got {t}")
        if not self.n_list or any(int(n) != n or n < 1 for n in self.n_list):
            raise SpecError(f"n_list must be positive integers, got {self.n_list}")
        if any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise SpecError(f"n_list must be strictly increasing, got {self.n_list}")
        if int(self.replicas) != self.replicas or self.replicas < 1:
            raise SpecError(f"replicas must be an integer >= 1, got {self.replicas}")
        if not 0 <= int(self.base_seed) < 2**64:
            raise SpecError(f"base_seed must be an unsigned 64-bit integer, got {self.base_seed}")
        if self.workers < 1 or self.block_rows < 1:
            raise SpecError("workers and block_rows must be >= 1")

    @property
    def speed_field(self) -> SpeedField:
        return parse_field(self.field)

    def replica_seed(self, replica: int) -> int:
        return (int(self.base_seed) + replica) % 2**64

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise SpecError("config must be a JSON object")
        unknown = set(d) - _CONFIG_KEYS
        if unknown:
            raise SpecError(f"unknown config key(s): {sorted(unknown)}")
        missing = {"field", "targets", "n_list"} - set(d)
        if missing:
            raise SpecError(f"config is missing {sorted(missing)}")
        try:
            return cls(
                field=str(d["field"]),
                targets=tuple((float(t[0]), float(t[1])) for t in d["targets"]),
                n_list=tuple(int(n) for n in d["n_list"]),
                replicas=int(d.get("replicas", 5)),
                base_seed=int(d.get("base_seed", 0)),
                out_csv=d.get("out_csv"),
                out_svg=d.get("out_svg"),
                optimizer=dict(d.get("optimizer", {})),
                record_wall_ms=bool(d.get("record_wall_ms", False)),
                workers=int(d.get("workers", 1)),
                block_rows=int(d.get("block_rows", 256)),
            )
        except (TypeError, ValueError, IndexError) as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"malformed config: {exc}") from None


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OutputError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"config {path} is not valid JSON: {exc}") from None
    cfg = ExperimentConfig.from_dict(data)
    # relative output paths are resolved against the config's directory
    base = Path(path).resolve().parent
    updates = {}
    for key in ("out_csv", "out_svg"):
        v = getattr(cfg, key)
        if v is not None and not Path(v).is_absolute():
            updates[key] = str(base / v)
    if updates:
        cfg = ExperimentConfig(**{**asdict(cfg), **updates})
    return cfg


# -- shape reference -------------------------------------------------------------


def reference_shape(field: SpeedField, x: float, y: float, optimizer: Optional[dict] = None) -> ShapeEval:
    """Γ at (x, y): closed form when the family has one, numeric otherwise."""
    if isinstance(field, Constant):
        from .macro_shape import Polyline

        v = gamma_homog(field.r, x, y)
        return ShapeEval(v, Polyline([(0, 0), (x, y)], v), "straight")
    if isinstance(field, ShiftedTwoPhase):
        return cf.two_phase_shape(field.r, field.lam, x, y)
    if isinstance(field, CornerField):
        return cf.corner_shape(field, x, y)
    return optimize_polyline(field, (x, y), **(optimizer or {}))


# -- convergence ---------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    model: str
    target_x: float
    target_y: float
    n: int
    replica: int
    g_over_n: float
    gamma_hat: float
    abs_err: float
    wall_ms: int

    def sort_key(self):
        return (self.target_x, self.target_y, self.n, self.replica)


def converge_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    field = cfg.speed_field
    model = field.spec()
    gammas = {t: reference_shape(field, *t, optimizer=cfg.optimizer).value for t in cfg.targets}

    def task(args):
        (x, y), n, rep = args
        env = EnvironmentSpec(field, n, cfg.replica_seed(rep))
        t0 = time.perf_counter()
        g = last_passage(env, (0, 0), scaled_lattice_target(n, x, y)).value / n
        ms = int(round((time.perf_counter() - t0) * 1000)) if cfg.record_wall_ms else 0
        gh = gammas[(x, y)]
        return ResultRow(model, x, y, n, rep, g, gh, abs(g - gh), ms)

    jobs = [(t, n, rep) for t in cfg.targets for n in cfg.n_list for rep in range(cfg.replicas)]
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(task, jobs))
    else:
        rows = [task(j) for j in jobs]
    rows.sort(key=ResultRow.sort_key)
    return rows


@dataclass(frozen=True)
class SummaryRow:
    target_x: float
    target_y: float
    n: int
    mean_g_over_n: float
    stderr: float
    mean_abs_err: float
    gamma_hat: float


def summarize(rows: Sequence[ResultRow]) -> list[SummaryRow]:
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.target_x, r.target_y, r.n), []).append(r)
    out = []
    for (x, y, n), rs in sorted(groups.items()):
        g = np.array([r.g_over_n for r in rs])
        se = float(g.std(ddof=1) / math.sqrt(len(g))) if len(g) > 1 else 0.0
        out.append(SummaryRow(x, y, n, float(g.mean()), se, float(np.mean([r.abs_err for r in rs])), rs[0].gamma_hat))
    return out


def error_trend_ok(summary: Sequence[SummaryRow]) -> dict:
    """Per target: is mean abs_err nonincreasing in n up to two standard errors?"""
    out = {}
    by_target: dict = {}
    for s in summary:
        by_target.setdefault((s.target_x, s.target_y), []).append(s)
    for t, ss in by_target.items():
        ss.sort(key=lambda s: s.n)
        ok = all(b.mean_abs_err <= a.mean_abs_err + 2 * max(a.stderr, b.stderr) for a, b in zip(ss, ss[1:]))
        out[t] = ok
    return out


# -- CSV -----------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _rows_as_lists(rows, columns):
    for r in rows:
        if isinstance(r, dict):
            yield [_fmt(r[c]) for c in columns]
        else:
            yield [_fmt(getattr(r, c)) for c in columns]


def csv_text(rows: Iterable, columns: Sequence[str] = CONVERGE_COLUMNS, comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in _rows_as_lists(rows, columns):
        w.writerow(row)
    return buf.getvalue()


def emit_csv(rows: Iterable, path, columns: Sequence[str] = CONVERGE_COLUMNS, comments: Sequence[str] = ()) -> None:
    text = csv_text(rows, columns, comments)
    try:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write CSV {path}: {exc}") from exc


_INT_COLS = {"n", "replica", "wall_ms", "step_index"}
_STR_COLS = {"model", "kind", "branch"}


def parse_csv(path_or_text, row_type=None) -> list:
    """Read a CSV written by :func:`emit_csv` back into typed rows."""
    text = path_or_text
    if not isinstance(text, str) or "\n" not in text:
        try:
            text = Path(path_or_text).read_text()
        except OSError as exc:
            raise OutputError(f"cannot read CSV {path_or_text}: {exc}") from exc
    lines = [ln for ln in text.split("\n") if ln and not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None:
        return []
    out = []
    for rec in reader:
        d = {}
        for k, v in zip(header, rec):
            d[k] = v if k in _STR_COLS else (int(v) if k in _INT_COLS else float(v))
        out.append(row_type(**d) if row_type is not None else d)
    return out


# -- SVG -----------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


@dataclass
class Series:
    label: str
    xs: Sequence[float]
    ys: Sequence[float]
    style: str = "line"  # "line", "scatter" or "both"
    color: Optional[str] = None


def _nice_ticks(lo, hi, count=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def svg_text(series: Sequence[Series], title: str = "", xlabel: str = "x", ylabel: str = "y",
             width: int = 640, height: int = 420, equal_aspect: bool = False) -> str:
    ml, mr, mt, mb = 64, 150, 36, 48
    pw, ph = width - ml - mr, height - mt - mb
    xs = [float(v) for s in series for v in s.xs]
    ys = [float(v) for s in series for v in s.ys]
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    padx, pady = 0.04 * (x1 - x0), 0.06 * (y1 - y0)
    x0, x1, y0, y1 = x0 - padx, x1 + padx, y0 - pady, y1 + pady
    if equal_aspect:
        span = max(x1 - x0, y1 - y0)
        x1, y1 = x0 + span, y0 + span

    def sx(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{ml + pw / 2:.2f}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{_esc(title)}</text>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _nice_ticks(x0, x1):
        out.append(f'<line x1="{sx(t):.2f}" y1="{mt + ph}" x2="{sx(t):.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{mt + ph + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{t:g}</text>')
    for t in _nice_ticks(y0, y1):
        out.append(f'<line x1="{ml - 5}" y1="{sy(t):.2f}" x2="{ml}" y2="{sy(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{sy(t) + 4:.2f}" text-anchor="end" font-family="sans-serif" font-size="11">{t:g}</text>')
    out.append(f'<text x="{ml + pw / 2:.2f}" y="{height - 10}" text-anchor="middle" font-family="sans-serif" font-size="12">{_esc(xlabel)}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2:.2f}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {mt + ph / 2:.2f})">{_esc(ylabel)}</text>')
    for k, s in enumerate(series):
        color = s.color or _PALETTE[k % len(_PALETTE)]
        pts = [(sx(float(a)), sy(float(b))) for a, b in zip(s.xs, s.ys)]
        if s.style in ("line", "both") and len(pts) > 1:
            d = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
            out.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        if s.style in ("scatter", "both") or len(pts) == 1:
            for a, b in pts:
                out.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="3" fill="{color}"/>')
        ly = mt + 14 + 18 * k
        out.append(f'<rect x="{ml + pw + 12}" y="{ly - 8}" width="12" height="8" fill="{color}"/>')
        out.append(f'<text x="{ml + pw + 30}" y="{ly}" font-family="sans-serif" font-size="11">{_esc(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_svg(series: Sequence[Series], path, **kw) -> None:
    text = svg_text(series, **kw)
    try:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write SVG {path}: {exc}") from exc


def converge_series(summary: Sequence[SummaryRow]) -> list[Series]:
    by_target: dict = {}
    for s in summary:
        by_target.setdefault((s.target_x, s.target_y), []).append(s)
    out = []
    for k, ((x, y), ss) in enumerate(sorted(by_target.items())):
        ss.sort(key=lambda s: s.n)
        color = _PALETTE[k % len(_PALETTE)]
        out.append(Series(f"G/n at ({x:g}, {y:g})", [s.n for s in ss], [s.mean_g_over_n for s in ss], "both", color))
        out.append(Series(f"Gamma ({x:g}, {y:g})", [ss[0].n, ss[-1].n], [ss[0].gamma_hat] * 2, "line", "#7f7f7f"))
    return out


def run_converge(cfg: ExperimentConfig) -> tuple[list[ResultRow], list[SummaryRow]]:
    rows = converge_experiment(cfg)
    summary = summarize(rows)
    if cfg.out_csv:
        emit_csv(rows, cfg.out_csv, CONVERGE_COLUMNS)
    if cfg.out_svg:
        emit_svg(converge_series(summary), cfg.out_svg, title=f"Convergence of G/n: {cfg.field}", xlabel="n", ylabel="G/n")
    return rows, summary


# -- path overlays ---------------------------------------------------------------


@dataclass(frozen=True)
class OverlayRow:
    kind: str
    target_x: float
    target_y: float
    step_index: int
    px: float
    py: float
    branch: str


@dataclass(frozen=True)
class OverlayMetrics:
    target: tuple[float, float]
    branch: str
    colour_key: str
    sup_distance: float
    band_fraction: float
    value_gap: float


_COLOUR_KEY = {
    "crossing-C": "C",
    "boundary-B-vertical": "B-vertical",
    "boundary-B-horizontal": "B-horizontal",
}


def _densify(poly: np.ndarray, spacing: float) -> np.ndarray:
    pts = [poly[0]]
    for a, b in zip(poly[:-1], poly[1:]):
        m = max(int(math.ceil(np.linalg.norm(b - a) / spacing)), 1)
        t = np.arange(1, m + 1)[:, None] / m
        pts.extend(a + t * (b - a))
    return np.array(pts)


def path_metrics(micro: np.ndarray, macro: np.ndarray, band: float = 0.1, spacing: float = 1e-3) -> tuple[float, float]:
    """(Hausdorff distance, fraction of micro points within ``band`` of macro)."""
    dense = _densify(np.asarray(macro, float), spacing)
    d_micro = cKDTree(dense).query(micro)[0]
    d_macro = cKDTree(micro).query(dense)[0]
    return float(max(d_micro.max(), d_macro.max())), float(np.mean(d_micro <= band + spacing))


def path_overlay(cfg: ExperimentConfig, band: float = 0.1) -> tuple[list[OverlayRow], list[OverlayMetrics]]:
    if len(cfg.n_list) != 1:
        raise SpecError(f"path overlays use a single scale; n_list has {len(cfg.n_list)} entries")
    n = cfg.n_list[0]
    field = cfg.speed_field
    env = EnvironmentSpec(field, n, cfg.replica_seed(0))
    rows: list[OverlayRow] = []
    metrics: list[OverlayMetrics] = []
    for x, y in cfg.targets:
        ev = reference_shape(field, x, y, optimizer=cfg.optimizer)
        target = scaled_lattice_target(n, x, y)
        cells = (target[0] + 1) * (target[1] + 1)
        if cells <= DEFAULT_MAX_CELLS:
            res = last_passage(env, (0, 0), target, want_path=True)
        else:
            res = last_passage_checkpointed(env, (0, 0), target, cfg.block_rows)
        micro = res.path.astype(float) / n
        macro = np.asarray(ev.maximiser.waypoints, float)
        key = "non-unique" if ev.non_unique else _COLOUR_KEY.get(ev.branch, ev.branch)
        for k, (px, py) in enumerate(micro):
            rows.append(OverlayRow("micro", x, y, k, float(px), float(py), key))
        for k, (px, py) in enumerate(macro):
            rows.append(OverlayRow("macro", x, y, k, float(px), float(py), key))
        sup, frac = path_metrics(micro, macro, band)
        metrics.append(OverlayMetrics((x, y), ev.branch, key, sup, frac, res.value / n - ev.value))
    return rows, metrics


def overlay_series(rows: Sequence[OverlayRow]) -> list[Series]:
    out = []
    colours = {"C": "#1f77b4", "B-vertical": "#2ca02c", "B-horizontal": "#d62728", "non-unique": "#bcbd22"}
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.target_x, r.target_y, r.kind), []).append(r)
    for (x, y, kind), rs in sorted(groups.items()):
        rs.sort(key=lambda r: r.step_index)
        c = colours.get(rs[0].branch, "#7f7f7f")
        label = f"{kind} ({x:g}, {y:g}) {rs[0].branch}"
        out.append(Series(label, [r.px for r in rs], [r.py for r in rs], "line", c if kind == "macro" else "#444444"))
    return out


def run_paths(cfg: ExperimentConfig):
    rows, metrics = path_overlay(cfg)
    if cfg.out_csv:
        emit_csv(rows, cfg.out_csv, OVERLAY_COLUMNS)
    if cfg.out_svg:
        series = overlay_series(rows)
        field = cfg.speed_field
        if isinstance(field, CornerField):
            a = np.linspace(0, field.a0, 200)
            series.insert(0, Series("curve y=f(x)", a, field.f(a), "line", "#000000"))
        elif isinstance(field, ShiftedTwoPhase):
            xm = max(t[0] for t in cfg.targets)
            series.insert(0, Series("line y=x-lambda", [field.lam, xm], [0.0, xm - field.lam], "line", "#000000"))
        emit_svg(series, cfg.out_svg, title=f"Maximal paths: {cfg.field}", equal_aspect=True)
    return rows, metrics


# -- m2 sweep and expansion ---------------------------------------------------------


def sweep_grid(amin: float, amax: float, points: int, log: bool) -> np.ndarray:
    if points < 1:
        raise DomainError(f"points must be >= 1, got {points}")
    if log:
        if not amin > 0:
            raise DomainError("log grid needs amin > 0")
        return np.logspace(math.log10(amin), math.log10(amax), points)
    return np.linspace(amin, amax, points)


def m2_sweep(field, amin: float, amax: float, points: int = 50, log: bool = True, r: Optional[float] = None):
    """Rows (a, m1, m2, D_a, residual) and the predicted end limits."""
    f = parse_field(field) if isinstance(field, str) else field
    if not isinstance(f, CornerField):
        from .errors import UnsupportedFieldError

        raise UnsupportedFieldError(f"m2 sweeps need a corner field, got {f.family}")
    r = f.r if r is None else r
    rows = []
    for a in sweep_grid(amin, amax, points, log):
        a = float(a)
        m2 = cf.corner_m2(f, r, a)
        rows.append(dict(
            a=a,
            m1=float(f.f(a)) / a,
            m2=m2,
            D_a=cf.corner_D(f, r, a),
            residual=cf.crossing_residual(f, r, a, m2),
        ))
    header = {end: cf.classify_m2_limit(f, r, end) for end in ("origin", "a0")}
    return rows, header


def sweep_comments(field_spec: str, header: dict) -> list[str]:
    out = [f"field {field_spec}"]
    for end, lim in header.items():
        out.append(f"predicted limit at {end}: {lim.status} {_fmt(lim.value)}" + (f" ({lim.note})" if lim.note else ""))
    return out


def expand_table(f0: float, gamma_exp: float, c: float, r: float, a_values: Sequence[float]):
    p = cf.ExpansionParams(f0=f0, gamma_exp=gamma_exp, c=c, r=r)
    rows = []
    for a in a_values:
        e = cf.expansion_check(p, float(a))
        rows.append(dict(a=e.a, lhs=e.lhs, leading=e.leading, remainder=e.remainder, next_order_bound=e.next_order_bound))
    slope = None
    if len(rows) >= 2:
        r1, r2 = rows[-2], rows[-1]
        if r1["remainder"] > 0 and r2["remainder"] > 0:
            slope = math.log(r1["remainder"] / r2["remainder"]) / math.log(r1["a"] / r2["a"])
    return rows, slope


# -- continuity probe --------------------------------------------------------------


def continuity_exponent(shape_fn, target, direction=(1.0, 1.0), deltas=(1e-2, 1e-3, 1e-4)) -> tuple[float, list[float]]:
    """Fitted exponent p in |Γ(t + δ u) - Γ(t)| ~ C δ^p over the two smallest δ."""
    x, y = target
    u = np.asarray(direction, float)
    u = u / np.linalg.norm(u)
    base = shape_fn(x, y)
    diffs = [abs(shape_fn(x + d * u[0], y + d * u[1]) - base) for d in deltas]
    d1, d2 = deltas[-2], deltas[-1]
    p = math.log(diffs[-2] / diffs[-1]) / math.log(d1 / d2)
    return p, diffs
