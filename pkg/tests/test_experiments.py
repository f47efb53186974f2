import math

import numpy as np
import pytest

from clockshift.core import ScenarioConfig
from clockshift.experiments import (
    SweepSpec,
    curve_table,
    fit_inverse_square,
    read_table_csv,
    render_csv,
    run_curve,
    run_grid,
    run_shift_sweep,
    shift_row,
    write_table,
)
from clockshift.shifts import half_height_shift


def test_run_curve_without_field_is_zero():
    cfg = ScenarioConfig(v=5e-6, l=3e-3, pulse=0.0, geometry="rabi")
    deltas = np.linspace(-1.0, 1.0, 21)
    q, s = run_curve(cfg, deltas)
    np.testing.assert_array_equal(q.p12, np.zeros(21))
    np.testing.assert_array_equal(s.p12, np.zeros(21))


def test_run_curve_shares_grid_and_embeds_parameters():
    cfg = ScenarioConfig(v=5e-6, l=3e-3, pulse="pi", geometry="rabi")
    q, s = run_curve(cfg, np.linspace(-2 * cfg.omega, 2 * cfg.omega, 31))
    np.testing.assert_array_equal(q.deltas, s.deltas)
    table = curve_table(q, s, cfg)
    assert table.metadata["velocity_m_per_s"] == cfg.v
    assert table.metadata["omega_rad_per_s"] == cfg.omega
    assert "version" in table.metadata
    assert table.columns[0] == "delta_rad_per_s"
    # the Hz column mirrors the angular one
    for row in table.rows[:3]:
        assert row[1] == pytest.approx(row[0] / (2 * math.pi), rel=1e-15)


def test_threshold_grid_point_nudged_and_recorded():
    cfg = ScenarioConfig(v=5e-7, l=3e-3, pulse="pi", geometry="rabi")
    c = cfg.constants
    threshold = -c.hbar * cfg.k**2 / (2.0 * c.m)
    step = 1e-6 * cfg.omega
    deltas = np.array([threshold - step, threshold, threshold + step])
    q, _ = run_curve(cfg, deltas)
    assert len(q.exclusions) >= 1
    idx = [e[0] for e in q.exclusions]
    assert 1 in idx
    assert np.all(np.isfinite(q.p12))
    assert q.deltas[1] != threshold


def test_sweep_single_point_matches_direct_call():
    base = ScenarioConfig(v=5e-2, l=3e-3, pulse="pi", geometry="rabi")
    spec = SweepSpec(variable="velocity", minimum=5e-2, maximum=5e-2, count=1, base=base)
    table = run_shift_sweep(spec)
    assert len(table.rows) == 1
    row = table.rows[0]
    direct = half_height_shift(base)
    hh_col = table.columns.index("delta_hh_rad_per_s")
    assert row[hh_col] == pytest.approx(direct.delta_hh, rel=1e-12)


def test_sweep_spec_validation():
    base = ScenarioConfig(v=1e-2, l=3e-3, pulse="pi", geometry="rabi")
    with pytest.raises(ValueError):
        SweepSpec(variable="mass", minimum=1, maximum=2, count=3, base=base)
    with pytest.raises(ValueError):
        SweepSpec(variable="velocity", minimum=2, maximum=1, count=3, base=base)
    with pytest.raises(ValueError):
        SweepSpec(variable="velocity", minimum=1, maximum=2, count=0, base=base)
    with pytest.raises(ValueError):
        SweepSpec(variable="velocity", minimum=-1, maximum=2, count=3, base=base, spacing="log")
    with pytest.raises(ValueError):
        SweepSpec(variable="velocity", minimum=1, maximum=2, count=3, base=base, spacing="cubic")


def test_sweep_serial_parallel_identical():
    base = ScenarioConfig(v=1e-2, l=3e-3, pulse="pi", geometry="rabi")
    spec = SweepSpec(variable="velocity", minimum=1e-2, maximum=5e-2, count=4, base=base,
                     spacing="log")
    serial = render_csv(run_shift_sweep(spec, threads=1))
    parallel = render_csv(run_shift_sweep(spec, threads=4))
    assert serial == parallel


def test_sweep_output_selection():
    base = ScenarioConfig(v=1e-2, l=3e-3, pulse="pi", geometry="rabi")
    spec = SweepSpec(variable="velocity", minimum=1e-2, maximum=2e-2, count=2, base=base,
                     outputs=("hh_shift",))
    table = run_shift_sweep(spec)
    assert "delta_hh_rad_per_s" in table.columns
    assert "delta_max_rad_per_s" not in table.columns
    assert "envelope_rad_per_s" not in table.columns


def test_grid_single_zone_column_matches_sweep():
    table = run_grid([3e-3], [0.0], v=5e-2)
    direct = half_height_shift(ScenarioConfig(v=5e-2, l=3e-3, pulse="pi", geometry="rabi"))
    assert table.rows[0][2] == pytest.approx(direct.delta_hh, rel=1e-12)
    assert table.rows[0][1] == 0.0


def test_grid_width_doubling_quarters_offset():
    table = run_grid([1.5e-3, 3e-3], [5.0], v=5e-2)
    vals = {row[0]: row[3] for row in table.rows}
    ratio = vals[3e-3] / vals[1.5e-3]
    assert abs(ratio - 0.25) < 0.05


def test_grid_monotonicity_reported():
    table = run_grid([1.5e-3, 3e-3], [0.0, 5.0], v=5e-2, threads=2)
    assert table.metadata["monotone_decreasing_in_l"] == "true"
    assert table.metadata["monotone_decreasing_in_N"] == "true"
    assert len(table.rows) == 4
    assert all(row[4] == "" for row in table.rows)


def test_fit_recovers_exact_inverse_square():
    xs = np.array([1.0, 2.0, 3.0, 5.0, 8.0])
    ys = 7.0 / xs**2
    free, fixed = fit_inverse_square(xs, ys)
    assert free.p == pytest.approx(-2.0, abs=1e-12)
    assert free.c == pytest.approx(7.0, rel=1e-12)
    assert free.rms_residual < 1e-13
    assert fixed.p == -2.0
    assert fixed.c == pytest.approx(7.0, rel=1e-12)
    assert fixed.rms_residual < 1e-13


def test_fit_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_inverse_square([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        fit_inverse_square([1.0, 2.0, 3.0, 4.0], [1.0, -2.0, 3.0, 4.0])


def test_csv_round_trip(tmp_path):
    cfg = ScenarioConfig(v=5e-6, l=3e-3, pulse="pi", geometry="rabi")
    q, s = run_curve(cfg, np.linspace(-cfg.omega, cfg.omega, 9))
    table = curve_table(q, s, cfg)
    path = tmp_path / "curve.csv"
    write_table(table, path)
    back = read_table_csv(path)
    assert back.columns == table.columns
    assert len(back.rows) == len(table.rows)
    for a, b in zip(back.rows, table.rows):
        assert a[0] == b[0]          # 17 significant digits round-trip doubles
        assert a[2] == b[2]


def test_float_formatting_precision():
    cfg = ScenarioConfig(v=1.0 / 3.0, l=3e-3, pulse="pi", geometry="rabi")
    row = shift_row(cfg)
    text = render_csv(
        run_shift_sweep(
            SweepSpec(variable="velocity", minimum=1.0 / 3.0, maximum=1.0, count=1, base=cfg)
        )
    )
    assert "0.33333333333333331" in text
    assert row[-1] == ""


def test_repeated_runs_byte_identical():
    base = ScenarioConfig(v=2e-2, l=3e-3, pulse="pi", geometry="rabi")
    spec = SweepSpec(variable="field_width", minimum=2e-3, maximum=4e-3, count=3, base=base)
    assert render_csv(run_shift_sweep(spec)) == render_csv(run_shift_sweep(spec))
