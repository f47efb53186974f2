"""Command-line interface.

Subcommands: curve, shift, sweep, grid, fit, peres.  A declarative JSON
config file supplies scenario parameters; individual flags override it.
Exit codes: 0 success, 2 configuration error, 3 solver failure (partial
results are still written where possible).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import PhysicalConstants, ScenarioConfig, peres_bound
from .curves import default_delta_grid, scenario_params
from .experiments import (
    SweepSpec,
    Table,
    curve_table,
    fit_inverse_square,
    fit_table,
    read_table_csv,
    render_csv,
    render_json,
    run_curve,
    run_grid,
    run_shift_sweep,
    shift_row,
    write_table,
    SHIFT_COLUMNS,
    _VERSION,
)
from .shifts import BracketError, HalfHeightError, half_height_shift
from .transfer import ThresholdError

_CONFIG_KEYS = ("mass", "velocity", "field_width", "gap_ratio", "pulse", "geometry", "dimensionless")


class ConfigError(ValueError):
    pass


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config file; flags override its values")
    p.add_argument("--mass", type=float, help="atomic mass in kg")
    p.add_argument("--velocity", type=float, help="incident velocity in m/s")
    p.add_argument("--field-width", type=float, dest="field_width", help="field zone width l in m")
    p.add_argument("--gap-ratio", type=float, dest="gap_ratio", help="gap ratio N = L/l")
    p.add_argument("--pulse", help="pi | pi2 | omega=<rad/s>")
    p.add_argument("--geometry", choices=["rabi", "ramsey"])
    p.add_argument("--dimensionless", action="store_true", default=None,
                   help="hbar = m = 1 test units")
    p.add_argument("--out", type=Path, help="output file (stdout when omitted)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--svg", action="store_true", help="render a figure next to --out")
    p.add_argument("--threads", type=int, default=1)


def _resolve_scenario(args) -> ScenarioConfig:
    settings = {
        "mass": None,
        "velocity": None,
        "field_width": None,
        "gap_ratio": None,
        "pulse": None,
        "geometry": None,
        "dimensionless": None,
    }
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config file: {err}") from err
        for key, val in loaded.items():
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            settings[key] = val
    for key in settings:
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = flag

    dimensionless = bool(settings["dimensionless"])
    geometry = settings["geometry"] or "rabi"
    if dimensionless:
        constants = PhysicalConstants.dimensionless()
        if settings["mass"] is not None:
            constants = PhysicalConstants(hbar=1.0, m=settings["mass"], omega0=1.0)
        v = settings["velocity"] if settings["velocity"] is not None else 20.0
        l = settings["field_width"] if settings["field_width"] is not None else 1.0
    else:
        constants = PhysicalConstants()
        if settings["mass"] is not None:
            constants = PhysicalConstants(m=settings["mass"])
        v = settings["velocity"] if settings["velocity"] is not None else 5e-6
        l = settings["field_width"] if settings["field_width"] is not None else 3e-3
    n_ratio = settings["gap_ratio"]
    if geometry == "ramsey":
        if n_ratio is None or n_ratio <= 0.0:
            raise ConfigError("ramsey geometry needs --gap-ratio > 0")
        L = n_ratio * l
    else:
        if n_ratio not in (None, 0, 0.0):
            raise ConfigError("rabi geometry requires --gap-ratio 0 (or unset)")
        L = 0.0
    pulse = settings["pulse"]
    if pulse is None:
        pulse = "pi" if geometry == "rabi" else "pi2"
    elif isinstance(pulse, str) and pulse.startswith("omega="):
        try:
            pulse = float(pulse.split("=", 1)[1])
        except ValueError as err:
            raise ConfigError(f"bad pulse spec {pulse!r}") from err
    try:
        return ScenarioConfig(v=v, l=l, L=L, pulse=pulse, geometry=geometry, constants=constants)
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _emit(table: Table, args) -> None:
    if args.out is None:
        sys.stdout.write(render_csv(table) if args.format == "csv" else render_json(table))
    else:
        write_table(table, args.out, args.format)


def _figure_path(args) -> Path:
    if args.out is None:
        raise ConfigError("--svg needs --out to name the figure file")
    return Path(args.out).with_suffix(".svg")


def _cmd_curve(args) -> int:
    config = _resolve_scenario(args)
    deltas = None
    if args.delta_span is not None or args.points != 2001:
        deltas = default_delta_grid(config, count=args.points, span=args.delta_span or 4.0)
    q, s = run_curve(config, deltas)
    table = curve_table(q, s, config)
    _emit(table, args)
    if args.svg:
        from . import report

        report.save_figure(report.curve_figure(q, s), _figure_path(args))
    return 0


def _cmd_shift(args) -> int:
    config = _resolve_scenario(args)
    row = shift_row(config)
    table = Table(
        metadata={"generator": "clockshift", "version": _VERSION, "command": "shift",
                  **scenario_params(config)},
        columns=["velocity_m_per_s", *SHIFT_COLUMNS],
        rows=[(config.v, *row)],
    )
    _emit(table, args)
    failed = bool(row[-1])
    if args.svg and not failed:
        from . import report

        q, s = run_curve(config, default_delta_grid(config, count=801, span=2.5))
        res = half_height_shift(config)
        report.save_figure(report.curve_figure(q, s, res), _figure_path(args))
    if failed:
        print(f"solver failure: {row[-1]}", file=sys.stderr)
        return 3
    return 0


def _cmd_sweep(args) -> int:
    config = _resolve_scenario(args)
    spec = SweepSpec(
        variable=args.variable.replace("-", "_"),
        minimum=args.minimum,
        maximum=args.maximum if args.maximum is not None else args.minimum,
        count=args.count,
        spacing=args.spacing,
        base=config,
    )
    table = run_shift_sweep(spec, threads=args.threads)
    _emit(table, args)
    if args.svg:
        from . import report

        report.save_figure(report.sweep_figure(table), _figure_path(args))
    flags = [row[-1] for row in table.rows if row[-1]]
    if flags:
        print(f"{len(flags)} sweep rows flagged: {sorted(set(flags))}", file=sys.stderr)
        return 3
    return 0


def _parse_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as err:
        raise ConfigError(f"bad numeric list {text!r}") from err


def _cmd_grid(args) -> int:
    config = _resolve_scenario(args)
    l_values = _parse_list(args.l_values)
    n_values = _parse_list(args.n_values)
    if not l_values or not n_values:
        raise ConfigError("grid needs at least one l value and one N value")
    table = run_grid(l_values, n_values, v=config.v, constants=config.constants,
                     threads=args.threads)
    _emit(table, args)
    if args.svg:
        from . import report

        report.save_figure(report.grid_figure(table), _figure_path(args))
    flags = [row[-1] for row in table.rows if row[-1]]
    if flags:
        print(f"{len(flags)} grid cells flagged: {sorted(set(flags))}", file=sys.stderr)
        return 3
    return 0


def _cmd_fit(args) -> int:
    table = read_table_csv(args.input)
    for col in (args.x_col, args.y_col):
        if col not in table.columns:
            raise ConfigError(f"column {col!r} not found in {args.input}")
    xi, yi = table.columns.index(args.x_col), table.columns.index(args.y_col)
    xs = [row[xi] for row in table.rows]
    ys = [abs(row[yi]) for row in table.rows]
    try:
        free, fixed = fit_inverse_square(xs, ys)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    out = fit_table(free, fixed, args.x_col, args.y_col)
    _emit(out, args)
    if args.svg:
        from . import report

        report.save_figure(
            report.fit_figure(xs, ys, (free, fixed), args.x_col, args.y_col),
            _figure_path(args),
        )
    return 0


def _cmd_peres(args) -> int:
    config = _resolve_scenario(args)
    bound = peres_bound(config.v, config.constants)
    table = Table(
        metadata={"generator": "clockshift", "version": _VERSION, "command": "peres",
                  "mass_kg": config.constants.m, "velocity_m_per_s": config.v},
        columns=["velocity_m_per_s", "kinetic_energy_J", "time_resolution_bound_s"],
        rows=[(config.v, config.constants.kinetic_energy(config.v), bound)],
    )
    _emit(table, args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clockshift",
        description="Quantum-motion resonance shifts of Rabi/Ramsey clock fringes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_curve = sub.add_parser("curve", help="quantum + semiclassical resonance curves")
    _add_scenario_flags(p_curve)
    p_curve.add_argument("--points", type=int, default=2001, help="detuning grid size")
    p_curve.add_argument("--delta-span", type=float, dest="delta_span",
                         help="half-width of the grid in units of Omega (default 4)")
    p_curve.set_defaults(func=_cmd_curve)

    p_shift = sub.add_parser("shift", help="both shifts for a single scenario")
    _add_scenario_flags(p_shift)
    p_shift.set_defaults(func=_cmd_shift)

    p_sweep = sub.add_parser("sweep", help="shift observables along one swept parameter")
    _add_scenario_flags(p_sweep)
    p_sweep.add_argument("--variable", required=True,
                         choices=["velocity", "field-width", "gap-ratio"])
    p_sweep.add_argument("--min", type=float, required=True, dest="minimum")
    p_sweep.add_argument("--max", type=float, dest="maximum")
    p_sweep.add_argument("--count", type=int, default=10)
    p_sweep.add_argument("--spacing", choices=["linear", "log"], default="linear")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_grid = sub.add_parser("grid", help="fractional offsets over an l x N grid")
    _add_scenario_flags(p_grid)
    p_grid.add_argument("--l-values", required=True, dest="l_values",
                        help="comma-separated zone widths in m")
    p_grid.add_argument("--n-values", required=True, dest="n_values",
                        help="comma-separated gap ratios (0 = single zone)")
    p_grid.set_defaults(func=_cmd_grid)

    p_fit = sub.add_parser("fit", help="power-law fit of a table column pair")
    p_fit.add_argument("input", type=Path, help="CSV table produced by sweep/grid")
    p_fit.add_argument("--x-col", required=True)
    p_fit.add_argument("--y-col", required=True)
    p_fit.add_argument("--out", type=Path)
    p_fit.add_argument("--format", choices=["csv", "json"], default="csv")
    p_fit.add_argument("--svg", action="store_true")
    p_fit.set_defaults(func=_cmd_fit)

    p_peres = sub.add_parser("peres", help="energy-time resolution bound hbar/E")
    _add_scenario_flags(p_peres)
    p_peres.set_defaults(func=_cmd_peres)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (BracketError, HalfHeightError, ThresholdError) as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return 3
    except ValueError as err:          # bad ranges and similar setup errors
        print(f"config error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
