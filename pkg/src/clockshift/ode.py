"""Direct integration of the coupled stationary equations.

Verification path independent of the transfer matrices: the two-channel
second-order system is integrated as a first-order complex ODE, right to
left, from two linearly independent outgoing terminal conditions; the
incoming-flux matching then fixes the scattering amplitudes.  Right-to-left
integration keeps growing evanescent components out of the propagated
solutions in the reflection-dominated regime.

This module is a test dependency, not a runtime path of the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .core import ScenarioConfig
from .transfer import ScatteringAmplitudes


@dataclass(frozen=True)
class StepControl:
    rtol: float = 3e-11
    atol: float = 3e-12
    max_step: float = np.inf


@dataclass(frozen=True)
class OdeState:
    """Channel amplitudes and spatial derivatives at one point."""

    phi1: complex
    phi2: complex
    dphi1: complex
    dphi2: complex
    x: float


def probability_current(state: OdeState) -> float:
    """Conserved current combination Im(phi1* dphi1 + phi2* dphi2).

    Constant across the whole integration for any solution at real energy
    (in units of hbar/m times the physical current).
    """
    return float(
        (np.conj(state.phi1) * state.dphi1 + np.conj(state.phi2) * state.dphi2).imag
    )


def _segments(config: ScenarioConfig) -> list[tuple[float, float, float]]:
    """(x_left, x_right, omega) per region, left to right."""
    l, L = config.l, config.L
    omega = config.omega
    if config.geometry == "rabi":
        return [(0.0, l, omega)]
    return [(0.0, l, omega), (l, l + L, 0.0), (l + L, 2.0 * l + L, omega)]


def _rhs_factory(config: ScenarioConfig, delta: float, omega: float):
    c = config.constants
    k2 = config.k**2
    q2 = k2 + 2.0 * c.m * delta / c.hbar
    coupling = c.m * omega / c.hbar
    # y stacks one or more 4-component solutions (phi1, phi2, phi1', phi2');
    # the region is x-independent, so the RHS is one constant real matrix
    gen = np.array(
        [
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [-k2, coupling, 0.0, 0.0],
            [coupling, -q2, 0.0, 0.0],
        ]
    )
    def rhs(x, y):
        return (gen @ y.reshape(-1, 4).T).T.ravel()
    return rhs


def _integrate_leftward(config, delta, y_right, step: StepControl, fixed_step=None):
    y = y_right
    for x_left, x_right, omega in reversed(_segments(config)):
        rhs = _rhs_factory(config, delta, omega)
        if fixed_step is not None:
            y = _rk4(rhs, x_right, x_left, y, fixed_step)
        else:
            sol = solve_ivp(
                rhs,
                (x_right, x_left),
                y,
                method="RK45",
                rtol=step.rtol,
                atol=step.atol,
                max_step=step.max_step,
                dense_output=False,
            )
            if not sol.success:
                raise RuntimeError(f"leftward integration failed: {sol.message}")
            y = sol.y[:, -1]
    return y


def _rk4(rhs, x0, x1, y, steps_per_length):
    # classical fixed-step RK4; step count set by the caller via the rate
    n = max(2, int(abs(x1 - x0) * steps_per_length))
    h = (x1 - x0) / n
    for _ in range(n):
        k1 = rhs(x0, y)
        k2 = rhs(x0 + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(x0 + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(x0 + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        x0 += h
    return y


def _terminal_basis(config: ScenarioConfig, delta: float, x_right: float):
    """Outgoing-only terminal data for the two independent basis solutions.

    Basis u carries a pure ground-channel plane wave, basis w a pure
    excited-channel wave; for a closed channel w decays to the right
    (Im q > 0 branch).
    """
    wn = config.wavenumbers(delta)
    k, q = wn.k, wn.q
    ek = np.exp(1j * k * x_right)
    eq = np.exp(1j * q * x_right)
    u = np.array([ek, 0.0, 1j * k * ek, 0.0], dtype=complex)
    w = np.array([0.0, eq, 0.0, 1j * q * eq], dtype=complex)
    return u, w, wn


def integrate_sse(
    config: ScenarioConfig, delta: float, step: StepControl = StepControl(), fixed_step=None
) -> ScatteringAmplitudes:
    """Scattering amplitudes by adaptive 4th/5th-order integration of the coupled equations.

    ``fixed_step`` (steps per meter) switches to a plain fixed-step RK4 and
    exists for convergence-order measurements.
    """
    x_left, x_right = config.span
    u, w, wn = _terminal_basis(config, delta, x_right)
    y = _integrate_leftward(config, delta, np.concatenate([u, w]), step, fixed_step)
    yu, yw = y[:4], y[4:]

    k, q = wn.k, wn.q
    def coeffs(yy):
        # plane-wave coefficients at x_left = 0
        a = 0.5 * (yy[0] + yy[2] / (1j * k))
        b = 0.5 * (yy[0] - yy[2] / (1j * k))
        c = 0.5 * (yy[1] + yy[3] / (1j * q))
        d = 0.5 * (yy[1] - yy[3] / (1j * q))
        return a, b, c, d

    au, bu, cu, du = coeffs(yu)
    aw, bw, cw, dw = coeffs(yw)
    match = np.array([[au, aw], [cu, cw]], dtype=complex)
    cond = np.linalg.cond(match)
    if not np.isfinite(cond) or cond > 1e12:
        raise RuntimeError(f"ill-conditioned boundary matching (cond={cond:.3e})")
    t11, t12 = np.linalg.solve(match, np.array([1.0, 0.0], dtype=complex))
    r11 = t11 * bu + t12 * bw
    r12 = t11 * du + t12 * dw
    return ScatteringAmplitudes(
        r11=complex(r11),
        r12=complex(r12),
        t11=complex(t11),
        t12=complex(t12),
        flux_weights=(1.0, q.real / k),
    )


def solution_states(
    config: ScenarioConfig,
    delta: float,
    n_samples: int = 64,
    step: StepControl = StepControl(),
) -> list[OdeState]:
    """Sample the physical (unit incoming flux) solution across the field span.

    Used to check current conservation along the integration.
    """
    amps = integrate_sse(config, delta, step)
    x_left, x_right = config.span
    wn = config.wavenumbers(delta)
    ek = np.exp(1j * wn.k * x_right)
    eq = np.exp(1j * wn.q * x_right)
    y = np.array(
        [
            amps.t11 * ek,
            amps.t12 * eq,
            amps.t11 * 1j * wn.k * ek,
            amps.t12 * 1j * wn.q * eq,
        ],
        dtype=complex,
    )
    states = [OdeState(phi1=y[0], phi2=y[1], dphi1=y[2], dphi2=y[3], x=x_right)]
    xs = np.linspace(x_right, x_left, n_samples)
    for x_stop in xs[1:]:
        # integrate from the previous sample down to x_stop, region by region
        x_cur = states[-1].x
        y_cur = np.array(
            [states[-1].phi1, states[-1].phi2, states[-1].dphi1, states[-1].dphi2],
            dtype=complex,
        )
        for seg_left, seg_right, omega in reversed(_segments(config)):
            lo = max(seg_left, x_stop)
            hi = min(seg_right, x_cur)
            if hi <= lo:
                continue
            rhs = _rhs_factory(config, delta, omega)
            sol = solve_ivp(rhs, (hi, lo), y_cur, method="RK45",
                            rtol=step.rtol, atol=step.atol)
            if not sol.success:
                raise RuntimeError(f"sampling integration failed: {sol.message}")
            y_cur = sol.y[:, -1]
        states.append(
            OdeState(phi1=y_cur[0], phi2=y_cur[1], dphi1=y_cur[2], dphi2=y_cur[3], x=float(x_stop))
        )
    return states
