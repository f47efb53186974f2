"""Classical-motion baselines for the excitation probability.

The single-zone formula and the two-zone composition both treat the atomic
motion as a classical transit of duration T = l/v (and L/v across the gap);
they are exactly symmetric in the detuning and serve as the reference the
quantum curves are compared against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ScenarioConfig


@dataclass(frozen=True)
class SemiclassicalCurve:
    deltas: np.ndarray
    p12: np.ndarray
    flight_time: float
    geometry: str


def rabi_scl(delta, omega: float, T: float):
    """Excitation probability after one field transit of duration T.

    P = omega^2/(omega^2+delta^2) * sin^2(sqrt(omega^2+delta^2) T / 2).
    Accepts a scalar or array detuning.
    """
    if T <= 0.0:
        raise ValueError("flight time T must be positive")
    if omega < 0.0:
        raise ValueError("omega must be non-negative")
    delta = np.asarray(delta, dtype=float)
    if omega == 0.0:
        out = np.zeros_like(delta)
        return out if out.ndim else float(out)
    op2 = omega * omega + delta * delta
    out = (omega * omega / op2) * np.sin(0.5 * np.sqrt(op2) * T) ** 2
    return out if out.ndim else float(out)


def _field_unitary(delta, omega: float, tau: float) -> np.ndarray:
    """Rotating-frame 2x2 evolution over one field zone, any pulse area.

    Shape (..., 2, 2) broadcast over the detuning.
    """
    delta = np.asarray(delta, dtype=float)
    omega_prime = np.hypot(delta, omega)
    half = 0.5 * omega_prime * tau
    c = np.cos(half)
    # sin(half)/omega_prime, finite at omega_prime -> 0
    s_over = 0.5 * tau * np.sinc(half / np.pi)
    phase = np.exp(0.5j * delta * tau)
    u = np.empty(delta.shape + (2, 2), dtype=complex)
    u[..., 0, 0] = phase * (c - 1j * delta * s_over)
    u[..., 1, 1] = phase * (c + 1j * delta * s_over)
    u[..., 0, 1] = phase * (-1j * omega * s_over)
    u[..., 1, 0] = u[..., 0, 1]
    return u


def ramsey_scl(delta, omega: float, tau_field: float, tau_gap: float):
    """Two-zone excitation probability |<2| U_field U_gap U_field |1>|^2.

    U_gap = diag(1, e^{i delta tau_gap}) is the free rotating-frame phase
    accumulated across the gap.  Composition of 2x2 blocks keeps the result
    valid for arbitrary pulse areas.
    """
    if tau_field <= 0.0 or tau_gap < 0.0:
        raise ValueError("durations must be positive (gap may be zero)")
    delta_arr = np.asarray(delta, dtype=float)
    u = _field_unitary(delta_arr, omega, tau_field)
    gap_phase = np.exp(1j * delta_arr * tau_gap)
    # amplitude <2|U (gap) U|1> written out; the gap only phases row/col 2
    amp = u[..., 1, 0] * u[..., 0, 0] + u[..., 1, 1] * gap_phase * u[..., 1, 0]
    out = np.abs(amp) ** 2
    return out if out.ndim else float(out)


def excitation_probability_scl(config: ScenarioConfig, delta):
    """Semiclassical probability for a full scenario (either geometry)."""
    if config.geometry == "rabi":
        return rabi_scl(delta, config.omega, config.flight_time)
    return ramsey_scl(delta, config.omega, config.flight_time, config.gap_time)


def semiclassical_curve(config: ScenarioConfig, deltas) -> SemiclassicalCurve:
    deltas = np.asarray(deltas, dtype=float)
    return SemiclassicalCurve(
        deltas=deltas,
        p12=np.asarray(excitation_probability_scl(config, deltas), dtype=float),
        flight_time=config.flight_time,
        geometry=config.geometry,
    )
