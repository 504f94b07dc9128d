"""Command-line interface.

Exit codes: 0 success, 2 config/parse error, 3 domain error, 4 I/O error.
"""

from __future__ import annotations

import functools
import sys

import click
import numpy as np

from . import closed_forms as cf
from . import harness
from .errors import LPPError, UnsupportedFieldError
from .lpp_engine import EnvironmentSpec, dump_row, last_passage, passage_row, scaled_lattice_target
from .macro_shape import optimize_polyline
from .speed_field import CornerField, parse_field


def _fmt(v) -> str:
    return harness._fmt(v)


def _guard(fn):
    """Map library errors to the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except LPPError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(exc.exit_code)

    return wrapper


def _field(spec: str):
    return parse_field(spec)


@click.group()
@click.version_option(package_name="inhomlpp")
def main():
    """Inhomogeneous exponential last-passage percolation."""


@main.command()
@click.option("--field", "spec", required=True, help="Field spec, e.g. 'two-phase:r=0.5,lambda=1'.")
@click.option("--x", type=float, required=True)
@click.option("--y", type=float, required=True)
@click.option("--method", type=click.Choice(["auto", "closed", "numeric"]), default="auto", show_default=True)
@click.option("--multistart", type=int, default=16, show_default=True)
@click.option("--free-waypoints", type=int, default=0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="Optimizer RNG seed.")
@_guard
def solve(spec, x, y, method, multistart, free_waypoints, seed):
    """Evaluate the shape function Γ at (x, y)."""
    field = _field(spec)
    if method == "numeric":
        ev = optimize_polyline(field, (x, y), free_waypoints=free_waypoints, multistart=multistart, rng_seed=seed)
    elif method == "closed":
        if field.family not in ("constant", "two-phase", "corner-power", "corner-sqrt"):
            raise UnsupportedFieldError(f"no closed form for {field.family}; use --method numeric")
        ev = harness.reference_shape(field, x, y)
    else:
        ev = harness.reference_shape(
            field, x, y, optimizer=dict(free_waypoints=free_waypoints, multistart=multistart, rng_seed=seed)
        )
    click.echo(f"Gamma = {_fmt(ev.value)}")
    click.echo(f"branch = {ev.branch}" + (" (non-unique)" if ev.non_unique else ""))
    click.echo("maximiser = " + " -> ".join(f"({_fmt(px)}, {_fmt(py)})" for px, py in ev.maximiser.waypoints))
    if ev.crossing is not None:
        click.echo(f"crossing = ({_fmt(ev.crossing[0])}, {_fmt(ev.crossing[1])})")
    for k, v in ev.residuals.items():
        click.echo(f"residual[{k}] = {_fmt(v)}")


@main.command()
@click.option("--field", "spec", required=True)
@click.option("--n", type=int, required=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), required=True)
@click.option("--x", type=float, required=True)
@click.option("--y", type=float, required=True)
@click.option("--path", "path_file", type=click.Path(dir_okay=False), default=None, help="Write the maximal path as CSV (i,j).")
@click.option("--dump-row", "row_file", type=click.Path(dir_okay=False), default=None, help="Binary dump of the final DP row.")
@_guard
def simulate(spec, n, seed, x, y, path_file, row_file):
    """Simulate G for the lattice target (floor(nx), floor(ny))."""
    env = EnvironmentSpec(_field(spec), n, seed)
    target = scaled_lattice_target(n, x, y)
    res = last_passage(env, (0, 0), target, want_path=path_file is not None)
    click.echo(f"G = {_fmt(res.value)}")
    click.echo(f"G/n = {_fmt(res.value / n)}")
    if path_file is not None:
        harness.emit_csv(
            [dict(i=int(i), j=int(j)) for i, j in res.path], path_file, columns=("i", "j")
        )
    if row_file is not None:
        dump_row(row_file, target[1], passage_row(env, (0, 0), target))


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out-csv", default=None, help="Override the config's out_csv.")
@_guard
def converge(config_path, out_csv):
    """Convergence study of G/n toward Γ; writes CSV (and SVG if configured)."""
    cfg = harness.load_config(config_path)
    if out_csv is not None:
        cfg = harness.ExperimentConfig(**{**harness.asdict(cfg), "out_csv": out_csv})
    rows, summary = harness.run_converge(cfg)
    if not cfg.out_csv:
        click.echo(harness.csv_text(rows), nl=False)
    else:
        for s in summary:
            click.echo(
                f"({_fmt(s.target_x)}, {_fmt(s.target_y)}) n={s.n}: mean G/n={s.mean_g_over_n:.6f} "
                f"se={s.stderr:.6f} Gamma={s.gamma_hat:.6f} mean|err|={s.mean_abs_err:.6f}"
            )


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@_guard
def paths(config_path):
    """Microscopic maximal paths next to macroscopic maximisers."""
    cfg = harness.load_config(config_path)
    rows, metrics = harness.run_paths(cfg)
    if not cfg.out_csv:
        click.echo(harness.csv_text(rows, harness.OVERLAY_COLUMNS), nl=False)
    for m in metrics:
        click.echo(
            f"({_fmt(m.target[0])}, {_fmt(m.target[1])}) branch={m.branch} key={m.colour_key} "
            f"sup_distance={m.sup_distance:.4f} band_fraction={m.band_fraction:.3f}",
            err=not cfg.out_csv,
        )


@main.command()
@click.option("--field", "spec", required=True)
@click.option("--x", type=float, required=True)
@click.option("--y", type=float, required=True)
@click.option("--points", type=int, default=cf.ROOT_GRID, show_default=True)
@_guard
def crossing(spec, x, y, points):
    """List type-C crossing roots, type-B candidates and the winner."""
    field = _field(spec)
    if not isinstance(field, CornerField):
        raise UnsupportedFieldError(f"crossing analysis needs a corner field, got {field.family}")
    roots = cf.crossing_roots(field, x, y, points=points)
    click.echo("type-C roots:")
    if not roots:
        click.echo("  (none)")
    for s in roots:
        click.echo(
            f"  a={_fmt(s.a)} f(a)={_fmt(s.point[1])} m1={_fmt(s.m1)} m2={_fmt(s.m2)} "
            f"D_a={_fmt(s.D_a)} residual={_fmt(s.residual)} value={_fmt(s.value)}"
        )
    ev = cf.corner_shape(field, x, y, points=points)
    click.echo("candidates:")
    for br, v in ev.candidates:
        click.echo(f"  {br}: {_fmt(v)}")
    click.echo(f"winner = {ev.branch} value={_fmt(ev.value)}" + (" (non-unique)" if ev.non_unique else ""))


@main.command()
@click.option("--field", "spec", required=True)
@click.option("--amin", type=float, required=True)
@click.option("--amax", type=float, required=True)
@click.option("--points", type=int, default=50, show_default=True)
@click.option("--log/--linear", "log", default=False, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_guard
def m2sweep(spec, amin, amax, points, log, out):
    """Tabulate m1, m2, D_a and the crossing residual along a grid of a."""
    rows, header = harness.m2_sweep(spec, amin, amax, points, log)
    comments = harness.sweep_comments(spec, header)
    if out:
        harness.emit_csv(rows, out, harness.SWEEP_COLUMNS, comments)
    else:
        click.echo(harness.csv_text(rows, harness.SWEEP_COLUMNS, comments), nl=False)


@main.command()
@click.option("--f0", type=float, required=True)
@click.option("--gamma", "gamma_exp", type=float, required=True)
@click.option("--c", type=float, required=True)
@click.option("--r", type=float, required=True)
@click.option("--amin", type=float, default=1e-8, show_default=True)
@click.option("--amax", type=float, default=1e-2, show_default=True)
@click.option("--points", type=int, default=7, show_default=True)
@_guard
def expand(f0, gamma_exp, c, r, amin, amax, points):
    """Compare 1/sqrt(m2) with its small-a leading term."""
    a_values = np.logspace(np.log10(amax), np.log10(amin), points)
    rows, slope = harness.expand_table(f0, gamma_exp, c, r, a_values)
    comments = [f"f0={_fmt(f0)} gamma={_fmt(gamma_exp)} c={_fmt(c)} r={_fmt(r)}"]
    if slope is not None:
        comments.append(f"remainder log-log slope over the last two rows: {slope:.6f}")
    click.echo(harness.csv_text(rows, harness.EXPAND_COLUMNS, comments), nl=False)


if __name__ == "__main__":  # pragma: no cover
    main()
