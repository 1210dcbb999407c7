"""Command-line front end: figure data, propagator cross-checks, self-check.

Every data command emits '#'-headed CSV files (and, unless --no-plot,
a PNG rendering next to each) whose metadata records the complete
parameter set.  Execution is sequential whether or not --serial is
passed; the flag only pins the determinism promise into the metadata
header, so equal parameters always reproduce files byte-for-byte.

Exit codes: 0 success, 1 invariant failure, 2 configuration error.
Diagnostics go to standard error; data goes to files only.
"""

from __future__ import annotations

import importlib.resources
import json
import math
import pathlib

import click
import numpy as np
from click.core import ParameterSource
from scipy.integrate import simpson

from . import __version__
from .checks import (
    check_composition,
    check_mode_fidelity,
    check_propagator_equivalence,
    check_static_reduction,
    check_zero_table,
    run_selfcheck,
)
from .dynamics import (
    TrapGeometry,
    density_overlap,
    density_vs_radius,
    density_vs_time,
    energy_expectation,
    instantaneous_coeffs,
    instantaneous_mode,
    observation_frame,
    project_eigenstate_initial,
)
from .errors import TruncationError
from .figures import render_series
from .series import FigureSeries, write_series
from .specfun import ModeIndex, save_zero_table, shared_zero_table

DEFAULT_GOLDEN = importlib.resources.files("sphtrap") / "data" / "overlap_golden.csv"

# Figure-scenario basis sizes grow with the projection chirp |beta|;
# n + 1.3|beta| overshoots slightly so the first attempt usually lands.
AUTO_TRUNC_CAP = 520
AUTO_TRUNC_TAIL = 2e-5


# =========================================================================
# Config file handling
# =========================================================================


def _read_config(path) -> dict:
    """Flat JSON object of option defaults; nesting is a config error."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, ValueError) as exc:
        raise click.UsageError(f"config file {path}: {exc}")
    if not isinstance(raw, dict):
        raise click.UsageError(f"config file {path}: top level must be an object")
    for key, value in raw.items():
        if isinstance(value, dict):
            raise click.UsageError(f"config key {key!r}: nested objects not allowed")
    return raw


def _convert_entry(ctx: click.Context, opt: click.Option, value):
    try:
        if opt.is_flag:
            if not isinstance(value, bool):
                raise click.UsageError(f"config key {opt.name!r}: expected true/false")
            return value
        if opt.multiple:
            if not isinstance(value, (list, tuple)):
                raise click.UsageError(f"config key {opt.name!r}: expected a list")
            return tuple(opt.type.convert(item, opt, ctx) for item in value)
        if opt.nargs > 1:
            if not isinstance(value, (list, tuple)) or len(value) != opt.nargs:
                raise click.UsageError(
                    f"config key {opt.name!r}: expected a list of {opt.nargs}"
                )
            return tuple(opt.type.convert(item, opt, ctx) for item in value)
        return opt.type.convert(value, opt, ctx)
    except click.UsageError:
        raise
    except click.ClickException as exc:
        raise click.UsageError(f"config key {opt.name!r}: {exc.format_message()}")


def _effective(ctx: click.Context) -> dict:
    """Final option values: command line beats config file beats defaults.

    Unknown config keys are ignored so one flat file can serve several
    commands.
    """
    values = dict(ctx.params)
    path = values.pop("config_path", None)
    if path is None:
        return values
    options: dict = {}
    for param in ctx.command.params:
        if not isinstance(param, click.Option):
            continue
        options[param.name] = param
        for decl in param.opts:
            options[decl.lstrip("-").replace("-", "_")] = param
    for key, value in _read_config(path).items():
        opt = options.get(key.replace("-", "_"))
        if opt is None or opt.name == "config_path" or value is None:
            continue
        if ctx.get_parameter_source(opt.name) is not ParameterSource.DEFAULT:
            continue
        values[opt.name] = _convert_entry(ctx, opt, value)
    return values


def _config_options(fn):
    fn = click.option(
        "--config", "config_path", type=click.Path(exists=True, dir_okay=False),
        default=None, help="JSON file of flat option defaults; flags win.",
    )(fn)
    return fn


def _figure_options(fn):
    fn = click.option(
        "--plot/--no-plot", "plot", default=True, show_default=True,
        help="Render a PNG next to each CSV.",
    )(fn)
    fn = click.option(
        "--serial", is_flag=True,
        help="Record single-threaded deterministic mode in the metadata.",
    )(fn)
    fn = click.option(
        "--outdir", type=click.Path(file_okay=False), default="figures",
        show_default=True, help="Directory for emitted files.",
    )(fn)
    return _config_options(fn)


# =========================================================================
# Shared helpers
# =========================================================================


def _say(text: str) -> None:
    click.echo(text, err=True)


def _fail(message: str) -> None:
    raise click.ClickException(f"invariant failed: {message}")


def _outdir(cfg) -> pathlib.Path:
    path = pathlib.Path(cfg["outdir"])
    path.mkdir(parents=True, exist_ok=True)
    return path


def _base_metadata(cfg, command: str) -> dict:
    return {
        "command": command,
        "version": __version__,
        "serial": str(bool(cfg.get("serial", False))).lower(),
    }


def _emit(series: FigureSeries, csv_path: pathlib.Path, plot: bool) -> None:
    write_series(series, csv_path)
    _say(f"wrote {csv_path}")
    if plot:
        png_path = csv_path.with_suffix(".png")
        render_series(series, png_path)
        _say(f"wrote {png_path}")


def _mode_from(cfg, key: str = "init") -> ModeIndex:
    l, n, m = cfg[key]
    try:
        return ModeIndex(l, n, m)
    except Exception as exc:
        raise click.UsageError(f"--{key} {l} {n} {m}: {exc}")


def _grid(start: float, stop: float, steps: int, name: str) -> np.ndarray:
    if steps < 2:
        raise click.UsageError(f"{name} grid needs at least 2 steps, got {steps}")
    if start == stop:
        raise click.UsageError(f"{name} grid is empty: start equals stop")
    return np.linspace(start, stop, steps)


def _project_pinned(geom, mode, n_trunc: int, tail_tol: float):
    """Projection at a caller-pinned basis size (figure-scenario contract)."""
    if n_trunc < 1:
        raise click.UsageError(f"--n-trunc must be >= 1, got {n_trunc}")
    try:
        return project_eigenstate_initial(geom, mode, n_trunc, tail_tol=tail_tol)
    except TruncationError as exc:
        _fail(str(exc))


def _project_auto(geom, mode, n_trunc: int):
    """Projection with chirp-scaled basis growth; n_trunc = 0 means auto."""
    if n_trunc:
        return _project_pinned(geom, mode, n_trunc, AUTO_TRUNC_TAIL)
    n = max(60, mode.n + 40, mode.n + math.ceil(1.3 * abs(geom.alpha)))
    n = min(n, AUTO_TRUNC_CAP)
    while True:
        try:
            return project_eigenstate_initial(
                geom, mode, n, tail_tol=AUTO_TRUNC_TAIL
            )
        except TruncationError as exc:
            if n >= AUTO_TRUNC_CAP:
                _fail(str(exc))
            n = min(n + 60, AUTO_TRUNC_CAP)


def _mode_density(geom, mode, frame, eta: np.ndarray, t: float) -> np.ndarray:
    """Scaled density of a frozen-wall eigenstate, zero outside the wall."""
    r = eta * frame.wavelength
    wall = geom.wall_radius(t)
    rho = np.zeros_like(eta)
    inside = r <= wall
    radial = np.asarray(instantaneous_mode(geom, mode, r[inside], t))
    rho[inside] = frame.wavelength**3 * eta[inside] ** 2 * radial**2
    return rho


# =========================================================================
# Commands
# =========================================================================


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Moving-wall sphere dynamics: figure data and invariant checks."""


@main.command()
@_config_options
@click.option("--l-max", type=int, default=50, show_default=True)
@click.option("--n-max", type=int, default=100, show_default=True)
@click.option(
    "--output", type=click.Path(dir_okay=False), default="zeros.csv",
    show_default=True, help="Cache file to write (header l,n,zero).",
)
@click.pass_context
def zeros(ctx, **_):
    """Build the Bessel zero table, verify it, and write the cache."""
    cfg = _effective(ctx)
    if cfg["l_max"] < 0 or cfg["n_max"] < 1:
        raise click.UsageError("need l_max >= 0 and n_max >= 1")
    results = check_zero_table(cfg["l_max"], cfg["n_max"])
    for result in results:
        _say(result.line())
    bad = [r for r in results if not r.passed]
    if bad:
        _fail(bad[0].name)
    table = shared_zero_table(cfg["l_max"], cfg["n_max"])
    save_zero_table(table, cfg["output"])
    _say(f"wrote {cfg['output']}")


@main.command()
@_figure_options
@click.option(
    "--alpha", "alphas", multiple=True, type=float,
    help="Wall rates; repeatable.  [default: -2 -4 -6 -10]",
)
@click.option("--init", nargs=3, type=int, default=(1, 1, 0), show_default=True,
              help="Initial mode (l, n, m).")
@click.option("--n-trunc", type=int, default=10, show_default=True)
@click.option("--n-curves", type=int, default=4, show_default=True,
              help="How many |b_n|^2 columns to emit.")
@click.option("--xi-stop", type=float, default=0.5, show_default=True)
@click.option("--xi-steps", type=int, default=26, show_default=True)
@click.option("--tail-tol", type=float, default=2e-3, show_default=True,
              help="Accepted projection tail at the pinned basis size.")
@click.pass_context
def transitions(ctx, **_):
    """Occupation probabilities |b_n(t)|^2 against the wall radius xi."""
    cfg = _effective(ctx)
    alphas = cfg["alphas"] or (-2.0, -4.0, -6.0, -10.0)
    mode = _mode_from(cfg)
    n_curves = cfg["n_curves"]
    if not 1 <= n_curves <= cfg["n_trunc"]:
        raise click.UsageError("--n-curves must lie in [1, n_trunc]")
    xi_grid = _grid(1.0, cfg["xi_stop"], cfg["xi_steps"], "xi")
    outdir = _outdir(cfg)

    survival_at_end = {}
    for alpha in alphas:
        if alpha == 0.0:
            raise click.UsageError("xi is constant at alpha = 0; nothing to sweep")
        if (cfg["xi_stop"] - 1.0) * alpha < 0.0:
            raise click.UsageError(
                f"xi cannot reach {cfg['xi_stop']:g} at alpha = {alpha:g}"
            )
        geom = TrapGeometry(alpha)
        state = _project_pinned(geom, mode, cfg["n_trunc"], cfg["tail_tol"])
        rows = []
        for xi in xi_grid:
            t = 0.0 if xi == 1.0 else geom.time_at_xi(float(xi))
            coeffs = instantaneous_coeffs(state, t)
            probs = np.abs(coeffs.b[:n_curves]) ** 2
            plotted_sum = float(np.sum(probs))
            if plotted_sum > 1.0 + 1e-6:
                _fail(
                    f"plotted weight {plotted_sum:.8f} exceeds 1 at "
                    f"alpha={alpha:g}, xi={xi:g}"
                )
            rows.append([xi, *probs, plotted_sum])
        rows = np.asarray(rows)
        survival_at_end[alpha] = rows[-1, 1]

        metadata = _base_metadata(cfg, "transitions")
        metadata.update(
            alpha=f"{alpha:.17g}",
            init_l=mode.l, init_n=mode.n, init_m=mode.m,
            n_trunc=cfg["n_trunc"],
            xi_start="1", xi_stop=f"{cfg['xi_stop']:.17g}",
            xi_steps=cfg["xi_steps"],
            tail_tol=f"{cfg['tail_tol']:.17g}",
            sum_tol="1e-06",
        )
        series = FigureSeries(
            name=f"transitions_alpha{alpha:g}",
            axis_label="xi",
            columns=("xi", *(f"prob_{k}" for k in range(1, n_curves + 1)), "sum_check"),
            rows=rows,
            metadata=metadata,
        )
        _emit(series, outdir / f"transitions_alpha{alpha:g}.csv", cfg["plot"])

    if len(survival_at_end) > 1:
        slow = min(alphas, key=abs)
        fast = max(alphas, key=abs)
        if survival_at_end[fast] >= survival_at_end[slow]:
            _fail(
                f"survival at xi={cfg['xi_stop']:g} should drop for the faster "
                f"wall: alpha={fast:g} kept {survival_at_end[fast]:.6f}, "
                f"alpha={slow:g} kept {survival_at_end[slow]:.6f}"
            )


@main.command()
@_figure_options
@click.option(
    "--alpha", "alphas", multiple=True, type=float,
    help="Wall rates; repeatable.  [default: -2 -4 -6]",
)
@click.option("--init", nargs=3, type=int, default=(1, 1, 0), show_default=True,
              help="Initial mode (l, n, m).")
@click.option("--n-trunc", type=int, default=15, show_default=True)
@click.option("--xi-stop", type=float, default=0.3, show_default=True)
@click.option("--xi-steps", type=int, default=36, show_default=True)
@click.option("--tail-tol", type=float, default=1e-3, show_default=True,
              help="Accepted projection tail at the pinned basis size.")
@click.pass_context
def energy(ctx, **_):
    """Energy expectation over the frozen-wall ground level against xi."""
    cfg = _effective(ctx)
    alphas = cfg["alphas"] or (-2.0, -4.0, -6.0)
    mode = _mode_from(cfg)
    xi_grid = _grid(1.0, cfg["xi_stop"], cfg["xi_steps"], "xi")
    outdir = _outdir(cfg)

    columns = ["xi"]
    table = [xi_grid]
    ratio_mid = {}
    for alpha in alphas:
        if alpha == 0.0 or (cfg["xi_stop"] - 1.0) * alpha < 0.0:
            raise click.UsageError(
                f"xi cannot reach {cfg['xi_stop']:g} at alpha = {alpha:g}"
            )
        geom = TrapGeometry(alpha)
        state = _project_pinned(geom, mode, cfg["n_trunc"], cfg["tail_tol"])
        ratios = []
        for xi in xi_grid:
            t = 0.0 if xi == 1.0 else geom.time_at_xi(float(xi))
            ratios.append(energy_expectation(state, t)[1])
        ratios = np.asarray(ratios)
        # Fifteen basis terms leave a 2.6e-4 identity-collapse residue at
        # alpha = -6; the start check bounds that, it cannot demand zero.
        if abs(ratios[0] - 1.0) > 1e-3:
            _fail(
                f"ratio at xi=1 is {ratios[0]:.8f}, not 1, at alpha={alpha:g}"
            )
        columns.append(f"ratio_alpha{alpha:g}")
        table.append(ratios)
        mid = int(np.argmin(np.abs(xi_grid - 0.5)))
        ratio_mid[alpha] = ratios[mid]

    for slow, fast in zip(sorted(alphas, key=abs), sorted(alphas, key=abs)[1:]):
        if ratio_mid[fast] <= ratio_mid[slow]:
            _fail(
                f"energy ratio near xi=0.5 should grow with the wall rate: "
                f"alpha={fast:g} gives {ratio_mid[fast]:.6f}, "
                f"alpha={slow:g} gives {ratio_mid[slow]:.6f}"
            )

    metadata = _base_metadata(cfg, "energy")
    metadata.update(
        alpha=" ".join(f"{a:.17g}" for a in alphas),
        init_l=mode.l, init_n=mode.n, init_m=mode.m,
        n_trunc=cfg["n_trunc"],
        xi_start="1", xi_stop=f"{cfg['xi_stop']:.17g}", xi_steps=cfg["xi_steps"],
        tail_tol=f"{cfg['tail_tol']:.17g}",
        start_tol="1e-03",
    )
    series = FigureSeries(
        name="energy_ratio", axis_label="xi", columns=tuple(columns),
        rows=np.column_stack(table), metadata=metadata,
    )
    _emit(series, outdir / "energy_ratio.csv", cfg["plot"])


@main.command("density-r")
@_figure_options
@click.option(
    "--multiplier", "multipliers", multiple=True, type=float,
    help="Wall rates in units of the mode rate x/2; repeatable.  "
         "[default: 0 0.01 1 10 15 20]",
)
@click.option("--init", nargs=3, type=int, default=(0, 5, 0), show_default=True,
              help="Initial mode (l, n, m).")
@click.option("--r0", type=float, default=2.0, show_default=True,
              help="Expansion target radius; curves are taken when the "
                   "wall crosses it.")
@click.option("--eta-steps", type=int, default=501, show_default=True)
@click.option("--n-trunc", type=int, default=0, show_default=True,
              help="Basis size; 0 grows it until the tail is negligible.")
@click.pass_context
def density_r(ctx, **_):
    """Radial density against scaled radius when the wall crosses r0."""
    cfg = _effective(ctx)
    multipliers = cfg["multipliers"] or (0.0, 0.01, 1.0, 10.0, 15.0, 20.0)
    mode = _mode_from(cfg)
    r0 = cfg["r0"]
    if r0 <= 1.0:
        raise click.UsageError("--r0 must exceed the initial radius 1")
    if any(m < 0.0 for m in multipliers):
        raise click.UsageError("multipliers must be >= 0 (expansion)")
    frame = observation_frame(TrapGeometry(0.0), mode, r0)
    eta_grid = _grid(0.0, frame.eta0, cfg["eta_steps"], "eta")
    outdir = _outdir(cfg)

    moving = [m for m in multipliers if m > 0.0]
    # The static curve is time-independent; evaluating it at the slowest
    # moving case's arrival time just fixes a reproducible header entry.
    slowest = min(moving) if moving else None
    static_time = (
        0.0 if slowest is None
        else (r0 - 1.0) / (2.0 * slowest * frame.alpha_scale)
    )

    metadata = _base_metadata(cfg, "density-r")
    metadata.update(
        init_l=mode.l, init_n=mode.n, init_m=mode.m,
        r0=f"{r0:.17g}", eta_steps=cfg["eta_steps"],
        alpha_scale=f"{frame.alpha_scale:.17g}",
        multiplier=" ".join(f"{m:g}" for m in multipliers),
        static_time=f"{static_time:.17g}",
        norm_tol="1e-04",
    )

    columns = ["eta"]
    table = [eta_grid]
    curves = {}
    for mult in multipliers:
        if mult == 0.0:
            geom = TrapGeometry(0.0)
            rho = _mode_density(geom, mode, frame, eta_grid, static_time)
            n_used = mode.n
        else:
            geom = TrapGeometry(mult * frame.alpha_scale)
            state = _project_auto(geom, mode, cfg["n_trunc"])
            t_cross = (r0 - 1.0) / geom.wall_speed
            rho = density_vs_radius(state, frame, eta_grid, t_cross, clip=True)
            n_used = state.n_trunc
        norm = simpson(rho, x=eta_grid)
        if abs(norm - 1.0) > 1e-4:
            _fail(
                f"density at multiplier {mult:g} integrates to {norm:.8f}"
            )
        columns.append(f"rho_mult_{mult:g}")
        table.append(rho)
        curves[mult] = rho
        metadata[f"n_trunc_mult_{mult:g}"] = n_used

    if any(m >= 0.005 and m <= 0.02 for m in curves):
        slow_mult = next(m for m in multipliers if 0.005 <= m <= 0.02)
        geom = TrapGeometry(slow_mult * frame.alpha_scale)
        t_cross = (r0 - 1.0) / geom.wall_speed
        adiabatic_ref = _mode_density(geom, mode, frame, eta_grid, t_cross)
        overlap = density_overlap(eta_grid, curves[slow_mult], adiabatic_ref)
        metadata["overlap_adiabatic"] = f"{overlap:.6f}"
        if overlap <= 0.99:
            _fail(
                f"slow expansion should track the expanded-well mode: "
                f"overlap {overlap:.4f} <= 0.99"
            )
    if any(m >= 20.0 for m in curves):
        fast_mult = max(multipliers)
        initial_ref = _mode_density(
            TrapGeometry(0.0), mode, frame, eta_grid, 0.0
        )
        overlap = density_overlap(eta_grid, curves[fast_mult], initial_ref)
        metadata["overlap_sudden"] = f"{overlap:.6f}"
        if overlap <= 0.95:
            _fail(
                f"fast expansion should leave the profile nearly frozen: "
                f"overlap {overlap:.4f} <= 0.95"
            )

    series = FigureSeries(
        name=f"density_radius_l{mode.l}n{mode.n}", axis_label="eta",
        columns=tuple(columns), rows=np.column_stack(table), metadata=metadata,
    )
    _emit(series, outdir / f"density_radius_l{mode.l}n{mode.n}.csv", cfg["plot"])


@main.command("density-t")
@_figure_options
@click.option(
    "--radial-n", "radial_ns", multiple=True, type=int,
    help="Initial radial indices, one CSV each; repeatable.  [default: 15 100]",
)
@click.option(
    "--multiplier", "multipliers", multiple=True, type=float,
    help="Wall rates in units of the mode rate x/2; repeatable.  "
         "[default: 0.9 1 2]",
)
@click.option("--r0", type=float, default=2.0, show_default=True,
              help="Observation radius.")
@click.option("--t-steps", type=int, default=601, show_default=True)
@click.option("--t-span", type=float, default=1.5, show_default=True,
              help="Time range as a multiple of the far-edge flight time.")
@click.option("--n-trunc", type=int, default=0, show_default=True,
              help="Basis size; 0 grows it until the tail is negligible.")
@click.pass_context
def density_t(ctx, **_):
    """Density at a fixed observation radius against scaled time."""
    cfg = _effective(ctx)
    radial_ns = cfg["radial_ns"] or (15, 100)
    multipliers = cfg["multipliers"] or (0.9, 1.0, 2.0)
    r0 = cfg["r0"]
    if r0 <= 1.0:
        raise click.UsageError("--r0 must exceed the initial radius 1")
    if any(m <= 0.0 for m in multipliers):
        raise click.UsageError("multipliers must be > 0 (expanding wall)")
    if cfg["t_span"] <= 0.0:
        raise click.UsageError("--t-span must be positive")
    outdir = _outdir(cfg)

    for radial_n in radial_ns:
        mode = ModeIndex(0, radial_n, 0)
        frame = observation_frame(TrapGeometry(0.0), mode, r0)
        T_grid = _grid(0.0, cfg["t_span"] * frame.flight_far, cfg["t_steps"], "T")

        metadata = _base_metadata(cfg, "density-t")
        metadata.update(
            init_l=mode.l, init_n=mode.n, init_m=mode.m,
            r0=f"{r0:.17g}", t_steps=cfg["t_steps"],
            t_span=f"{cfg['t_span']:.17g}",
            alpha_scale=f"{frame.alpha_scale:.17g}",
            multiplier=" ".join(f"{m:g}" for m in multipliers),
            marker_T1=f"{frame.flight_near:.17g}",
            marker_T2=f"{frame.flight_far:.17g}",
        )

        columns = ["T"]
        table = [T_grid]
        first_peaks = []
        for mult in multipliers:
            geom = TrapGeometry(mult * frame.alpha_scale)
            state = _project_auto(geom, mode, cfg["n_trunc"])
            rho = density_vs_time(state, frame, T_grid)
            T_reach = frame.frequency * (r0 - 1.0) / geom.wall_speed
            before = T_grid < T_reach
            if np.any(rho[before] != 0.0):
                _fail(
                    f"density leaked outside the wall at multiplier {mult:g}"
                )
            columns.append(f"rho_mult_{mult:g}")
            table.append(rho)
            metadata[f"n_trunc_mult_{mult:g}"] = state.n_trunc
            peak = _first_peak(rho)
            if peak is not None:
                first_peaks.append((mult, peak))

        for (m_slow, h_slow), (m_fast, h_fast) in zip(first_peaks, first_peaks[1:]):
            if m_fast > m_slow and h_fast >= h_slow:
                _fail(
                    f"first density burst should flatten with wall speed: "
                    f"multiplier {m_fast:g} peaks at {h_fast:.6f}, "
                    f"{m_slow:g} at {h_slow:.6f} (radial n = {radial_n})"
                )

        series = FigureSeries(
            name=f"density_time_l0n{radial_n}", axis_label="T",
            columns=tuple(columns), rows=np.column_stack(table),
            metadata=metadata,
        )
        _emit(series, outdir / f"density_time_l0n{radial_n}.csv", cfg["plot"])


def _first_peak(rho: np.ndarray) -> float | None:
    """Height of the first prominent local maximum, None if monotone.

    Faint onset ripples precede the main burst at fast wall speeds, so
    only maxima within a quarter of the column peak count.
    """
    floor = 0.25 * float(np.max(rho))
    for i in range(1, len(rho) - 1):
        if rho[i] >= floor and rho[i] >= rho[i - 1] and rho[i] > rho[i + 1]:
            return float(rho[i])
    return None


@main.command("propagator-check")
@_config_options
@click.option("--n-max", type=int, default=200, show_default=True,
              help="Spectral truncation for every kernel check.")
@click.option("--alpha", type=float, default=0.5, show_default=True,
              help="Wall rate for the 1D-equivalence grid.")
@click.option(
    "--output", type=click.Path(dir_okay=False), default="propagator_report.json",
    show_default=True, help="Machine-readable report path.",
)
@click.pass_context
def propagator_check(ctx, **_):
    """Cross-check the spectral kernel: 1D map, fidelity, composition."""
    cfg = _effective(ctx)
    if cfg["n_max"] < 1:
        raise click.UsageError("--n-max must be >= 1")
    results = [check_propagator_equivalence(cfg["alpha"], cfg["n_max"])]
    fidelity, deficit = check_mode_fidelity(cfg["n_max"])
    results.append(fidelity)
    results.append(check_composition(cfg["n_max"]))
    results.append(check_static_reduction(cfg["n_max"]))
    for result in results:
        _say(result.line())
    report = {
        "alpha": cfg["alpha"],
        "n_max": cfg["n_max"],
        "norm_deficit": float(deficit),
        "passed": bool(all(r.passed for r in results)),
        "checks": [
            {
                "name": r.name,
                "passed": bool(r.passed),
                "measured": float(r.measured),
                "tolerance": float(r.tolerance),
                "detail": r.detail,
            }
            for r in results
        ],
    }
    with open(cfg["output"], "w", encoding="ascii", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _say(f"wrote {cfg['output']}")
    if not report["passed"]:
        failed = next(r for r in results if not r.passed)
        _fail(failed.name)


@main.command()
@_config_options
@click.option(
    "--golden", type=click.Path(exists=True, dir_okay=False), default=None,
    help="Overlap golden file; defaults to the packaged copy.",
)
@click.option(
    "--cache", type=click.Path(dir_okay=False), default=None,
    help="Zero-table cache to revalidate (as written by `zeros`).",
)
@click.option("--serial", is_flag=True,
              help="Accepted for symmetry; the suite is always sequential.")
@click.pass_context
def selfcheck(ctx, **_):
    """Run every invariant suite and report one line per check."""
    cfg = _effective(ctx)
    golden = cfg["golden"] if cfg["golden"] is not None else DEFAULT_GOLDEN
    results, elapsed = run_selfcheck(golden, cfg["cache"])
    for result in results:
        _say(result.line())
    passed = sum(r.passed for r in results)
    _say(f"{passed}/{len(results)} checks passed in {elapsed:.1f}s")
    if passed != len(results):
        failed = next(r for r in results if not r.passed)
        _fail(failed.name)


if __name__ == "__main__":
    main()
