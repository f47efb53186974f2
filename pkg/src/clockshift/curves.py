"""Resonance-curve sampling over detuning grids.

Thresholds (q = 0 or a dressed mode at zero) make the region matrices
singular; samplers nudge such grid points by one grid step and record the
exclusion instead of evaluating there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ScenarioConfig
from .semiclassical import excitation_probability_scl
from .transfer import ThresholdError, excitation_probability

# wavenumber magnitudes below this fraction of k count as "at threshold"
_THRESHOLD_REL = 1e-9


@dataclass(frozen=True)
class ResonanceCurve:
    """Sampled (detuning, P12) pairs with provenance."""

    deltas: np.ndarray
    p12: np.ndarray
    kind: str                   # "quantum" or "semiclassical"
    geometry: str
    params: dict = field(default_factory=dict)
    exclusions: tuple = ()      # (index, original delta, evaluated delta)

    @property
    def peak_index(self) -> int:
        return int(np.argmax(self.p12))


def default_delta_grid(config: ScenarioConfig, count: int = 2001, span: float = 4.0) -> np.ndarray:
    """Linear grid of ``count`` detunings spanning +-span*Omega around zero."""
    width = span * config.omega
    if width <= 0.0:
        width = 1.0 / config.flight_time
    return np.linspace(-width, width, count)


def _near_threshold(config: ScenarioConfig, delta: float) -> bool:
    wn = config.wavenumbers(delta)
    floor = _THRESHOLD_REL * wn.k
    return min(abs(wn.q), abs(wn.k_plus), abs(wn.k_minus)) < floor


def scenario_params(config: ScenarioConfig) -> dict:
    c = config.constants
    return {
        "hbar_J_s": c.hbar,
        "mass_kg": c.m,
        "omega0_rad_per_s": c.omega0,
        "velocity_m_per_s": config.v,
        "field_width_m": config.l,
        "gap_m": config.L,
        "gap_ratio": config.gap_ratio,
        "pulse": str(config.pulse),
        "omega_rad_per_s": config.omega,
        "geometry": config.geometry,
        "wavenumber_per_m": config.k,
    }


def quantum_curve(config: ScenarioConfig, deltas) -> ResonanceCurve:
    """Exact excitation probability on a detuning grid, nudging threshold points."""
    deltas = np.asarray(deltas, dtype=float)
    step = float(deltas[1] - deltas[0]) if deltas.size > 1 else max(config.omega, 1.0) * 1e-6
    p12 = np.empty_like(deltas)
    evaluated = deltas.copy()
    exclusions = []
    for i, d in enumerate(deltas):
        d_eval = float(d)
        if _near_threshold(config, d_eval):
            d_eval = d_eval + step
            exclusions.append((i, float(d), d_eval))
        try:
            p12[i] = excitation_probability(config, d_eval)
        except ThresholdError:
            d_eval = d_eval + step
            exclusions.append((i, float(d), d_eval))
            p12[i] = excitation_probability(config, d_eval)
        evaluated[i] = d_eval
    return ResonanceCurve(
        deltas=evaluated,
        p12=p12,
        kind="quantum",
        geometry=config.geometry,
        params=scenario_params(config),
        exclusions=tuple(exclusions),
    )


def semiclassical_resonance_curve(config: ScenarioConfig, deltas) -> ResonanceCurve:
    deltas = np.asarray(deltas, dtype=float)
    return ResonanceCurve(
        deltas=deltas,
        p12=np.asarray(excitation_probability_scl(config, deltas), dtype=float),
        kind="semiclassical",
        geometry=config.geometry,
        params=scenario_params(config),
    )
