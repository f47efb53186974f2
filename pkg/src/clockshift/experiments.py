"""Reproduction harness: curve sweeps, shift tables, parameter grids and fits.

Every emitted table embeds the fully resolved configuration as commented
``key=value`` metadata lines, states units in the column names, and formats
floats with 17 significant digits, so identical configuration and code
version give byte-identical output regardless of thread count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from importlib.metadata import PackageNotFoundError, version as _dist_version

import numpy as np

from .core import ScenarioConfig
from .curves import (
    ResonanceCurve,
    default_delta_grid,
    quantum_curve,
    scenario_params,
    semiclassical_resonance_curve,
)
from .shifts import (
    BracketError,
    HalfHeightError,
    analytic_max_shift_rabi_envelope,
    analytic_max_shift_ramsey_envelope,
    half_height_shift,
)
from .transfer import ThresholdError

try:
    _VERSION = _dist_version("clockshift")
except PackageNotFoundError:          # running from a source tree
    _VERSION = "0.0.0+src"

SWEEP_VARIABLES = ("velocity", "field_width", "gap_ratio")
SHIFT_COLUMNS = (
    "delta_max_rad_per_s",
    "delta_max_frac",
    "envelope_rad_per_s",
    "delta_hh_rad_per_s",
    "delta_hh_frac",
    "peak_height",
    "hh_left_rad_per_s",
    "hh_right_rad_per_s",
    "flag",
)


@dataclass
class Table:
    """Delimited result table: metadata block, unit-bearing column names, rows."""

    metadata: dict
    columns: list
    rows: list


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def render_csv(table: Table) -> str:
    lines = [f"# {key}={_fmt(val)}" for key, val in table.metadata.items()]
    lines.append(",".join(table.columns))
    lines.extend(",".join(_fmt(v) for v in row) for row in table.rows)
    return "\n".join(lines) + "\n"


def render_json(table: Table) -> str:
    payload = {
        "metadata": {k: _fmt(v) for k, v in table.metadata.items()},
        "columns": list(table.columns),
        "rows": [[_fmt(v) for v in row] for row in table.rows],
    }
    return json.dumps(payload, indent=2) + "\n"


def write_table(table: Table, path, fmt: str = "csv") -> None:
    text = render_csv(table) if fmt == "csv" else render_json(table)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _base_metadata(config: ScenarioConfig, command: str) -> dict:
    meta = {"generator": "clockshift", "version": _VERSION, "command": command}
    meta.update(scenario_params(config))
    return meta


# ---------------------------------------------------------------------------
# curves


def run_curve(config: ScenarioConfig, deltas=None) -> tuple[ResonanceCurve, ResonanceCurve]:
    """Quantum and semiclassical curves on a shared grid (threshold points nudged)."""
    if deltas is None:
        deltas = default_delta_grid(config)
    q = quantum_curve(config, deltas)
    s = semiclassical_resonance_curve(config, q.deltas)
    return q, s


def curve_table(q: ResonanceCurve, s: ResonanceCurve, config: ScenarioConfig) -> Table:
    meta = _base_metadata(config, "curve")
    meta["threshold_exclusions"] = len(q.exclusions)
    nudged = {i for i, _, _ in q.exclusions}
    rows = [
        (
            float(d),
            float(d) / (2.0 * math.pi),
            float(pq),
            float(ps),
            1 if i in nudged else 0,
        )
        for i, (d, pq, ps) in enumerate(zip(q.deltas, q.p12, s.p12))
    ]
    columns = ["delta_rad_per_s", "delta_hz", "p12_quantum", "p12_semiclassical", "threshold_nudged"]
    return Table(metadata=meta, columns=columns, rows=rows)


# ---------------------------------------------------------------------------
# shift sweeps


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter against shift observables.

    ``variable`` is one of velocity (m/s), field_width (m) or gap_ratio
    (dimensionless N = L/l).  A single-point sweep (count = 1) degenerates to
    one direct shift evaluation.
    """

    variable: str
    minimum: float
    maximum: float
    count: int
    base: ScenarioConfig
    spacing: str = "linear"
    outputs: tuple = ("max_shift", "hh_shift", "envelopes")

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"sweep variable must be one of {SWEEP_VARIABLES}")
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if self.count > 1 and not self.minimum < self.maximum:
            raise ValueError("minimum must be below maximum")
        if self.spacing not in ("linear", "log"):
            raise ValueError("spacing must be 'linear' or 'log'")
        if self.spacing == "log" and self.minimum <= 0.0:
            raise ValueError("log spacing requires a positive minimum")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.minimum])
        if self.spacing == "log":
            return np.geomspace(self.minimum, self.maximum, self.count)
        return np.linspace(self.minimum, self.maximum, self.count)


def _config_for(base: ScenarioConfig, variable: str, value: float) -> ScenarioConfig:
    if variable == "velocity":
        return replace(base, v=float(value))
    if variable == "field_width":
        # a Ramsey base keeps its gap ratio when the zone width changes
        new_L = base.gap_ratio * float(value) if base.geometry == "ramsey" else 0.0
        return replace(base, l=float(value), L=new_L)
    # gap_ratio: N = 0 means the single-zone scheme driven by a pi pulse,
    # N > 0 the two-zone scheme driven by pi/2 pulses
    if float(value) == 0.0:
        return replace(base, geometry="rabi", L=0.0, pulse="pi")
    return replace(base, geometry="ramsey", L=float(value) * base.l, pulse="pi2")


def _envelope(config: ScenarioConfig) -> float:
    if config.geometry == "rabi":
        return analytic_max_shift_rabi_envelope(config.k, config.l, config.constants)
    return analytic_max_shift_ramsey_envelope(
        config.k, config.l, config.gap_ratio, config.constants
    )


def shift_row(config: ScenarioConfig) -> tuple:
    """Shift observables of one scenario; solver failures flag the row with NaNs."""
    nan = float("nan")
    try:
        res = half_height_shift(config)
        return (
            res.delta_max,
            res.frac_max,
            _envelope(config),
            res.delta_hh,
            res.frac_hh,
            res.peak_height,
            res.hh_left,
            res.hh_right,
            "",
        )
    except (BracketError, HalfHeightError, ThresholdError) as err:
        return (nan, nan, _envelope(config), nan, nan, nan, nan, nan, type(err).__name__)


def run_shift_sweep(spec: SweepSpec, threads: int = 1) -> Table:
    """One row per sweep value; rows are assembled by index, so the output is
    identical under serial and parallel evaluation."""
    values = spec.values()
    configs = [_config_for(spec.base, spec.variable, v) for v in values]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            shift_rows = list(pool.map(shift_row, configs))
    else:
        shift_rows = [shift_row(c) for c in configs]
    unit = {"velocity": "velocity_m_per_s", "field_width": "field_width_m", "gap_ratio": "gap_ratio"}
    keep = set(range(len(SHIFT_COLUMNS)))
    drop = set()
    if "max_shift" not in spec.outputs:
        drop |= {0, 1}
    if "envelopes" not in spec.outputs:
        drop |= {2}
    if "hh_shift" not in spec.outputs:
        drop |= {3, 4, 6, 7}
    keep -= drop
    kept = sorted(keep)
    columns = [unit[spec.variable]] + [SHIFT_COLUMNS[i] for i in kept]
    rows = [
        (float(v), *[r[i] for i in kept])
        for v, r in zip(values, shift_rows)
    ]
    meta = _base_metadata(spec.base, "sweep")
    meta.update(
        sweep_variable=spec.variable,
        sweep_min=float(spec.minimum),
        sweep_max=float(spec.maximum),
        sweep_count=spec.count,
        sweep_spacing=spec.spacing,
    )
    return Table(metadata=meta, columns=columns, rows=rows)


# ---------------------------------------------------------------------------
# l x N grid


def run_grid(l_values, N_values, v: float, constants=None, threads: int = 1) -> Table:
    """Fractional half-height offsets over zone width and gap ratio.

    N = 0 cells run the single-zone pi-pulse scheme, N > 0 the two-zone
    pi/2-pulse scheme with gap N*l.  The metadata records whether the offset
    decreases monotonically along both axes.
    """
    l_values = [float(x) for x in l_values]
    N_values = [float(x) for x in N_values]
    if constants is None:
        constants = ScenarioConfig(v=v, l=l_values[0]).constants
    cells = [(l, N) for l in l_values for N in N_values]

    def cell_config(cell):
        l, N = cell
        if N == 0.0:
            return ScenarioConfig(v=v, l=l, pulse="pi", geometry="rabi", constants=constants)
        return ScenarioConfig(
            v=v, l=l, L=N * l, pulse="pi2", geometry="ramsey", constants=constants
        )

    configs = [cell_config(c) for c in cells]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(shift_row, configs))
    else:
        results = [shift_row(c) for c in configs]

    rows = [
        (l, N, res[3], res[4], res[8])
        for (l, N), res in zip(cells, results)
    ]
    frac = np.array([r[3] for r in rows], dtype=float).reshape(len(l_values), len(N_values))
    mono_l = bool(np.all(np.diff(frac, axis=0) < 0.0)) if len(l_values) > 1 else True
    mono_n = bool(np.all(np.diff(frac, axis=1) < 0.0)) if len(N_values) > 1 else True
    meta = _base_metadata(configs[0], "grid")
    meta.update(
        grid_l_values=";".join(_fmt(l) for l in l_values),
        grid_N_values=";".join(_fmt(n) for n in N_values),
        monotone_decreasing_in_l=str(mono_l).lower(),
        monotone_decreasing_in_N=str(mono_n).lower(),
    )
    columns = ["field_width_m", "gap_ratio", "delta_hh_rad_per_s", "delta_hh_frac", "flag"]
    return Table(metadata=meta, columns=columns, rows=rows)


# ---------------------------------------------------------------------------
# power-law fits


@dataclass(frozen=True)
class FitResult:
    """Power law c*x^p fitted in log space; residual is the rms of log y."""

    model: str
    c: float
    p: float
    rms_residual: float

    def predict(self, x):
        return self.c * np.asarray(x, dtype=float) ** self.p


def fit_inverse_square(xs, ys) -> tuple[FitResult, FitResult]:
    """Free power-law fit plus the fit constrained to exponent -2.

    Least squares on log y versus log x; requires at least four strictly
    positive points.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 4:
        raise ValueError("need at least 4 points for a power-law fit")
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise ValueError("power-law fit requires strictly positive data")
    lx, ly = np.log(xs), np.log(ys)
    p, logc = np.polyfit(lx, ly, 1)
    res_free = float(np.sqrt(np.mean((ly - (p * lx + logc)) ** 2)))
    free = FitResult(model="c*x^p", c=float(np.exp(logc)), p=float(p), rms_residual=res_free)
    logc2 = float(np.mean(ly + 2.0 * lx))
    res_fixed = float(np.sqrt(np.mean((ly - (-2.0 * lx + logc2)) ** 2)))
    fixed = FitResult(model="c*x^-2", c=float(np.exp(logc2)), p=-2.0, rms_residual=res_fixed)
    return free, fixed


def fit_table(free: FitResult, fixed: FitResult, x_name: str, y_name: str) -> Table:
    meta = {
        "generator": "clockshift",
        "version": _VERSION,
        "command": "fit",
        "x_column": x_name,
        "y_column": y_name,
    }
    columns = ["model", "amplitude", "exponent", "rms_log_residual"]
    rows = [
        (free.model, free.c, free.p, free.rms_residual),
        (fixed.model, fixed.c, fixed.p, fixed.rms_residual),
    ]
    return Table(metadata=meta, columns=columns, rows=rows)


def read_table_csv(path) -> Table:
    """Read back a table written by :func:`write_table` (csv format)."""
    metadata: dict = {}
    columns: list = []
    rows: list = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                metadata[key] = val
            elif not columns:
                columns = line.split(",")
            else:
                cells = []
                for cell in line.split(","):
                    try:
                        cells.append(float(cell))
                    except ValueError:
                        cells.append(cell)
                rows.append(tuple(cells))
    return Table(metadata=metadata, columns=columns, rows=rows)
