"""Resonance-shift extraction and analytic shift formulas.

Two observables are pulled off the central fringe: the displacement of the
curve maximum, and the midpoint of the two half-height detunings.  The
half-height midpoint is measured relative to detuning zero; the
semiclassical midpoint sits exactly there by symmetry, so the two
references coincide.  Half height means half of the actual peak height,
not 1/2 absolute, which matters when the peak height is below one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .core import PhysicalConstants, ScenarioConfig
from .curves import ResonanceCurve, default_delta_grid, scenario_params
from .semiclassical import excitation_probability_scl
from .transfer import excitation_probability, scattering_amplitudes, total_transfer

_INV_PHI = 0.5 * (math.sqrt(5.0) - 1.0)
_GOLDEN_TOL_REL = 1e-6      # |delta| resolution of the golden-section stage


class BracketError(RuntimeError):
    """No interior maximum inside the central-lobe bracket (reflection-dominated curve)."""


class HalfHeightError(RuntimeError):
    """A half-height crossing is missing; the fringe is deformed."""


class ExpansionError(RuntimeError):
    """Finite-difference expansion of t12 did not converge."""


@dataclass(frozen=True)
class ShiftResult:
    """Both shifts of one resonance curve, with fractional clock errors |shift|/omega0."""

    delta_max: float
    delta_hh: float
    frac_max: float
    frac_hh: float
    peak_height: float
    hh_left: float
    hh_right: float


@dataclass(frozen=True)
class ExpansionCoefficients:
    """Taylor coefficients of t12 in the detuning around zero, and the peak-condition combinations.

    gamma0/gamma1/gamma2 carry units 1, s, s^2; theta0 (dimensionless) and
    theta1 (s) are the constant and linear coefficients of the stationarity
    condition of the excitation probability, whose root -theta0/theta1
    approximates the peak displacement.
    """

    gamma0: complex
    gamma1: complex
    gamma2: complex
    theta0: float
    theta1: float

    @property
    def predicted_peak_shift(self) -> float:
        return -self.theta0 / self.theta1


# ---------------------------------------------------------------------------
# brackets and generic 1D searches


def central_lobe_bracket(config: ScenarioConfig) -> tuple[float, float]:
    """Detuning bracket containing the central fringe.

    Rabi: the two first zeros of the semiclassical curve.  Ramsey: the first
    minima of the semiclassical composition, found by an outward scan.
    """
    omega = config.omega
    T = config.flight_time
    if config.geometry == "rabi":
        area = omega * T
        if area >= 2.0 * math.pi:
            raise BracketError("pulse area >= 2*pi: central lobe has no simple first zero")
        edge = math.sqrt((2.0 * math.pi / T) ** 2 - omega * omega)
        return (-edge, edge)
    # Ramsey: scan the semiclassical curve out to ~1.5 central-fringe widths
    tau_gap = config.gap_time
    grid = np.linspace(0.0, 1.5 * math.pi / tau_gap, 600)
    p = np.asarray(excitation_probability_scl(config, grid))
    drops = np.nonzero((p[1:-1] <= p[:-2]) & (p[1:-1] < p[2:]))[0]
    if drops.size == 0:
        raise BracketError("no first fringe minimum found in the semiclassical scan")
    edge = float(grid[drops[0] + 1])
    return (-edge, edge)


def _golden_max(f, lo: float, hi: float) -> tuple[float, float]:
    """Golden-section maximization with a final parabolic polish."""
    a, b = lo, hi
    tol = _GOLDEN_TOL_REL * (b - a)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x0, f0 = (c, fc) if fc > fd else (d, fd)
    # parabolic vertex through (x0-h, x0, x0+h) sharpens the maximizer well
    # below the golden-section resolution when the peak is smooth
    h = 0.5 * (b - a)
    fm, fp = f(x0 - h), f(x0 + h)
    curv = fm - 2.0 * f0 + fp
    if curv < 0.0:
        x_ref = x0 + 0.5 * h * (fm - fp) / curv
        f_ref = f(x_ref)
        if f_ref >= f0:
            return x_ref, f_ref
    return x0, f0


def _find_peak(prob, lo: float, hi: float) -> tuple[float, float]:
    x, fx = _golden_max(prob, lo, hi)
    edge_tol = 2.0 * _GOLDEN_TOL_REL * (hi - lo)
    if min(x - lo, hi - x) < edge_tol:
        raise BracketError("maximum converged onto the bracket edge; no interior peak")
    return x, fx


def _half_height_result(prob, lo, hi, omega0) -> ShiftResult:
    delta_max, height = _find_peak(prob, lo, hi)
    target = 0.5 * height
    if not (prob(lo) < target and prob(hi) < target):
        raise HalfHeightError("curve does not fall below half height inside the central lobe")
    span = hi - lo
    left = brentq(lambda d: prob(d) - target, lo, delta_max,
                  xtol=1e-13 * span, rtol=8.9e-16)
    right = brentq(lambda d: prob(d) - target, delta_max, hi,
                   xtol=1e-13 * span, rtol=8.9e-16)
    mid = 0.5 * (left + right)
    return ShiftResult(
        delta_max=delta_max,
        delta_hh=mid,
        frac_max=abs(delta_max) / omega0,
        frac_hh=abs(mid) / omega0,
        peak_height=height,
        hh_left=left,
        hh_right=right,
    )


def _probability_fn(config: ScenarioConfig, curve: str):
    if curve == "quantum":
        return lambda d: excitation_probability(config, d)
    if curve == "semiclassical":
        return lambda d: float(excitation_probability_scl(config, d))
    raise ValueError(f"unknown curve kind {curve!r}")


# ---------------------------------------------------------------------------
# public operations


def peak_shift(config: ScenarioConfig, curve: str = "quantum") -> tuple[float, float]:
    """Displacement and height of the central-fringe maximum.

    Golden-section search between the semiclassical lobe edges, refined to
    1e-6 of the bracket width and polished by parabolic interpolation.
    """
    lo, hi = central_lobe_bracket(config)
    return _find_peak(_probability_fn(config, curve), lo, hi)


def half_height_shift(config: ScenarioConfig, curve: str = "quantum") -> ShiftResult:
    """Midpoint of the half-height detunings of the central fringe."""
    lo, hi = central_lobe_bracket(config)
    return _half_height_result(_probability_fn(config, curve), lo, hi, config.constants.omega0)


def analytic_max_shift_rabi(k: float, l: float, constants: PhysicalConstants) -> float:
    """Leading-order maximum displacement for a single-zone pi pulse.

    (hbar^2 pi^4 / (16 m^2 v l^3)) sin(2 k l) with v = hbar k / m.
    """
    return analytic_max_shift_rabi_envelope(k, l, constants) * math.sin(2.0 * k * l)


def analytic_max_shift_rabi_envelope(k: float, l: float, constants: PhysicalConstants) -> float:
    """Amplitude of the oscillating single-zone maximum displacement."""
    v = constants.hbar * k / constants.m
    return constants.hbar**2 * math.pi**4 / (16.0 * constants.m**2 * v * l**3)


def analytic_max_shift_ramsey_envelope(
    k: float, l: float, N: float, constants: PhysicalConstants
) -> float:
    """Envelope of the two-zone (pi/2 pulses) maximum displacement, gap N*l.

    Positive value; the numerical shift oscillates between +- this bound.
    """
    v = constants.hbar * k / constants.m
    return constants.hbar**2 * math.pi**2 / (16.0 * constants.m**2 * v * l**3 * N)


def half_height_shift_estimate(l: float, constants: PhysicalConstants) -> float:
    """Rough k-independent half-height shift hbar pi^2 / (4 m l^2) for one zone."""
    return constants.hbar * math.pi**2 / (4.0 * constants.m * l * l)


def gamma_expansion(config: ScenarioConfig, tol: float = 1e-8) -> ExpansionCoefficients:
    """Expand t12 to second order in the detuning around zero.

    gamma0 by direct evaluation; gamma1 and gamma2 by 4th-order central
    differences on the scaled detuning, with the step chosen by Richardson
    comparison targeting ``tol`` relative agreement.
    """
    omega = config.omega
    if omega <= 0.0:
        raise ValueError("expansion needs a coupled field (omega > 0)")
    cache: dict[float, complex] = {}

    def t12(u: float) -> complex:
        if u not in cache:
            delta = u * omega
            wn = config.wavenumbers(delta)
            cache[u] = scattering_amplitudes(total_transfer(config, delta), wn).t12
        return cache[u]

    def stencils(h: float) -> tuple[complex, complex]:
        f1, f2 = t12(h), t12(2 * h)
        fm1, fm2 = t12(-h), t12(-2 * h)
        f0 = t12(0.0)
        d1 = (-f2 + 8 * f1 - 8 * fm1 + fm2) / (12 * h)
        d2 = (-f2 + 16 * f1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h)
        return d1, d2

    # Each derivative is accepted (and Richardson-extrapolated) the first
    # time its half-step estimate agrees to tol, independently of the other:
    # the two truncation errors reach tol at different steps, and waiting for
    # a joint step would walk the second derivative onto its roundoff floor.
    # Agreement is relative with an absolute floor at the natural amplitude
    # scale (|t12| <= 1 in the scaled variable), so a coefficient passing
    # through zero cannot stall the search.
    h = 0.05
    d1_prev, d2_prev = stencils(h)
    d1_out = d2_out = None
    for _ in range(14):
        h *= 0.5
        d1, d2 = stencils(h)
        if d1_out is None and abs(d1 - d1_prev) <= tol * max(abs(d1), 1.0):
            d1_out = (16.0 * d1 - d1_prev) / 15.0
        if d2_out is None and abs(d2 - d2_prev) <= tol * max(abs(d2), 1.0):
            d2_out = (16.0 * d2 - d2_prev) / 15.0
        if d1_out is not None and d2_out is not None:
            break
        d1_prev, d2_prev = d1, d2
    else:
        raise ExpansionError(f"Richardson comparison did not reach {tol:g} relative agreement")
    d1, d2 = d1_out, d2_out

    gamma0 = t12(0.0)
    gamma1 = d1 / omega
    gamma2 = 0.5 * d2 / (omega * omega)
    k = config.k
    q2_hbar_over_m = k * k * config.constants.hbar / config.constants.m
    cross01 = 2.0 * (gamma1 * np.conj(gamma0)).real
    theta0 = abs(gamma0) ** 2 + q2_hbar_over_m * cross01
    theta1 = cross01 + 2.0 * q2_hbar_over_m * (
        abs(gamma1) ** 2 + 2.0 * (gamma2 * np.conj(gamma0)).real
    )
    return ExpansionCoefficients(
        gamma0=complex(gamma0),
        gamma1=complex(gamma1),
        gamma2=complex(gamma2),
        theta0=float(theta0),
        theta1=float(theta1),
    )


def velocity_average(
    config: ScenarioConfig,
    sigma_v: float,
    n_samples: int = 41,
    deltas=None,
) -> tuple[ResonanceCurve, ShiftResult]:
    """Gauss-Hermite average of the quantum curve over a Gaussian velocity cloud.

    The pulse condition is resolved once from the mean velocity (a real
    apparatus fixes the field strength once); every velocity node then sees
    that explicit Rabi frequency.  Shifts are recomputed on the averaged
    curve.
    """
    if sigma_v < 0.0:
        raise ValueError("sigma_v must be non-negative")
    if sigma_v >= config.v / 3.0:
        raise ValueError("velocity spread too wide: sigma_v must stay below v/3")
    omega = config.omega
    if sigma_v == 0.0:
        nodes = np.array([config.v])
        weights = np.array([1.0])
    else:
        t, w = np.polynomial.hermite.hermgauss(n_samples)
        nodes = config.v + math.sqrt(2.0) * sigma_v * t
        weights = w / w.sum()
    members = [replace(config, v=float(vi), pulse=omega) for vi in nodes]
    for m in members:
        if m.v <= 0.0 or m.energy_over_coupling() < 2.0:
            raise ValueError("velocity cloud reaches the reflection regime")

    def averaged(d: float) -> float:
        return float(sum(wi * excitation_probability(mi, d) for wi, mi in zip(weights, members)))

    lo, hi = central_lobe_bracket(config)
    result = _half_height_result(averaged, lo, hi, config.constants.omega0)
    if deltas is None:
        deltas = default_delta_grid(config, count=801)
    deltas = np.asarray(deltas, dtype=float)
    p12 = np.array([averaged(d) for d in deltas])
    params = scenario_params(config)
    params.update(
        velocity_sigma_m_per_s=sigma_v,
        velocity_samples=len(nodes),
        averaging="gauss-hermite",
    )
    curve = ResonanceCurve(
        deltas=deltas, p12=p12, kind="quantum", geometry=config.geometry, params=params
    )
    return curve, result
