"""Physical constants, scenario configuration and dressed-state algebra.

Everything here is a pure function of its inputs; all value types are frozen
dataclasses and safe to share between workers.  Internal units are SI
(double precision) unless :meth:`PhysicalConstants.dimensionless` is used,
which switches to hbar = m = 1 test units through a pure scaling layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Standard values; the literature on Cs fountain clocks fixes only the mass,
# the remaining constants are CODATA / SI-definition values.
HBAR_SI = 1.054571817e-34          # J s
CS_MASS_SI = 2.2e-25               # kg
CS_CLOCK_OMEGA_SI = 2.0 * math.pi * 9_192_631_770.0   # rad/s

TWO_PI = 2.0 * math.pi


def to_hz(omega: float) -> float:
    """Angular frequency (rad/s) -> ordinary frequency (Hz)."""
    return omega / TWO_PI


def from_hz(f: float) -> float:
    """Ordinary frequency (Hz) -> angular frequency (rad/s)."""
    return f * TWO_PI


@dataclass(frozen=True)
class PhysicalConstants:
    """hbar, atomic mass and clock transition frequency, all strictly positive."""

    hbar: float = HBAR_SI
    m: float = CS_MASS_SI
    omega0: float = CS_CLOCK_OMEGA_SI

    def __post_init__(self):
        if not (self.hbar > 0 and self.m > 0 and self.omega0 > 0):
            raise ValueError("hbar, m and omega0 must all be strictly positive")

    @classmethod
    def dimensionless(cls) -> "PhysicalConstants":
        """Test units hbar = m = 1 (and omega0 = 1 so fractional = absolute)."""
        return cls(hbar=1.0, m=1.0, omega0=1.0)

    def kinetic_energy(self, v: float) -> float:
        return 0.5 * self.m * v * v


@dataclass(frozen=True)
class DressedPair:
    """Eigenpair of the internal coupling block inside a field zone.

    lambda_plus/lambda_minus are the angular-frequency eigenvalues
    (-delta +/- omega_prime)/2 with omega_prime = sqrt(delta^2 + omega^2);
    the eigenvector rays are (1, 2*lambda/omega).
    """

    lambda_plus: float
    lambda_minus: float
    omega_prime: float
    eigvec_plus: tuple[float, float]
    eigvec_minus: tuple[float, float]


def dressed_pair(delta: float, omega: float) -> DressedPair:
    """Diagonalize the 2x2 internal block for detuning ``delta`` and coupling ``omega``.

    Requires omega > 0: at omega = 0 the eigenvector ray (1, 2*lambda/omega)
    degenerates and callers must use the uncoupled free-region solution.
    """
    if omega <= 0.0:
        raise ValueError("dressed_pair requires omega > 0; use the free-region path for omega = 0")
    omega_prime = math.hypot(delta, omega)
    # stable root pairing: the larger-magnitude eigenvalue carries no
    # cancellation, the other follows from lambda+ lambda- = -omega^2/4
    if delta >= 0.0:
        lam_m = -0.5 * (delta + omega_prime)
        lam_p = -0.25 * omega * omega / lam_m
    else:
        lam_p = 0.5 * (omega_prime - delta)
        lam_m = -0.25 * omega * omega / lam_p
    return DressedPair(
        lambda_plus=lam_p,
        lambda_minus=lam_m,
        omega_prime=omega_prime,
        eigvec_plus=(1.0, 2.0 * lam_p / omega),
        eigvec_minus=(1.0, 2.0 * lam_m / omega),
    )


@dataclass(frozen=True)
class ChannelWavenumbers:
    """Wavenumbers of the four propagating/evanescent modes at fixed energy.

    k is the incident ground-channel wavenumber, q the excited free-space
    channel, k_plus/k_minus the dressed modes inside a field zone.  Complex
    members always carry Im >= 0 so evanescent components decay along the
    propagation direction.
    """

    k: float
    q: complex
    k_plus: complex
    k_minus: complex


def _branch_sqrt(z: complex) -> complex:
    """Complex square root on the Im >= 0 branch; exact zero imag for z >= 0."""
    w = np.sqrt(complex(z.real, z.imag if z.imag else 0.0))
    if w.imag < 0.0:
        w = -w
    return complex(w)


def channel_wavenumbers(
    k: float, delta: float, omega: float, constants: PhysicalConstants
) -> ChannelWavenumbers:
    """Mode wavenumbers for incident wavenumber ``k`` at detuning ``delta``.

    q^2 = k^2 + 2 m delta / hbar, and the dressed modes obey
    hbar^2 k_pm^2 / 2m = hbar^2 k^2 / 2m - hbar lambda_pm.  Closed channels
    come back as evanescent complex wavenumbers, never as errors.
    """
    if k <= 0.0:
        raise ValueError("incident wavenumber k must be positive")
    two_m_over_hbar = 2.0 * constants.m / constants.hbar
    q = _branch_sqrt(complex(k * k + two_m_over_hbar * delta))
    if omega == 0.0:
        # Bare channels: no dressing, ground and excited modes pass through.
        return ChannelWavenumbers(k=k, q=q, k_plus=complex(k), k_minus=q)
    dp = dressed_pair(delta, omega)
    k_plus = _branch_sqrt(complex(k * k - two_m_over_hbar * dp.lambda_plus))
    k_minus = _branch_sqrt(complex(k * k - two_m_over_hbar * dp.lambda_minus))
    return ChannelWavenumbers(k=k, q=q, k_plus=k_plus, k_minus=k_minus)


def effective_detuning(laser_detuning: float, k_L: float, constants: PhysicalConstants) -> float:
    """Raman effective detuning: laser detuning minus the recoil term hbar*k_L^2/(2m)."""
    return laser_detuning - constants.hbar * k_L * k_L / (2.0 * constants.m)


def peres_bound(v: float, constants: PhysicalConstants) -> float:
    """Minimum clock time resolution hbar/E for a particle of speed ``v``.

    E is the kinetic energy m v^2 / 2; the bound is the energy-time limit on
    distinguishing two orthogonal clock-hand states.
    """
    if v <= 0.0:
        raise ValueError("velocity must be positive")
    return constants.hbar / constants.kinetic_energy(v)


# Pulse condition: "pi" and "pi2" resolve the coupling strength from the
# semiclassical transit time, a float is an explicit Rabi frequency in rad/s.
Pulse = str | float


@dataclass(frozen=True)
class ScenarioConfig:
    """One- or two-zone field crossing scenario.

    v is the incident velocity, l the width of each field zone, L the free
    gap between zones (zero exactly when geometry is "rabi").  ``pulse`` is
    "pi", "pi2" or an explicit Rabi frequency in rad/s.
    """

    v: float
    l: float
    L: float = 0.0
    pulse: Pulse = "pi"
    geometry: str = "rabi"
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        if self.v <= 0.0:
            raise ValueError("velocity v must be positive")
        if self.l <= 0.0:
            raise ValueError("field width l must be positive")
        if self.geometry not in ("rabi", "ramsey"):
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if self.geometry == "ramsey" and not self.L > 0.0:
            raise ValueError("ramsey geometry requires a positive gap L")
        if self.geometry == "rabi" and self.L != 0.0:
            raise ValueError("rabi geometry requires L = 0")
        if isinstance(self.pulse, str):
            if self.pulse not in ("pi", "pi2"):
                raise ValueError(f"unknown pulse condition {self.pulse!r}")
        elif not (isinstance(self.pulse, (int, float)) and self.pulse >= 0.0):
            raise ValueError("explicit Rabi frequency must be a non-negative number")

    @property
    def k(self) -> float:
        """Incident wavenumber m v / hbar."""
        return self.constants.m * self.v / self.constants.hbar

    @property
    def omega(self) -> float:
        """Rabi frequency resolved from the pulse condition (rad/s)."""
        if self.pulse == "pi":
            return self.constants.hbar * self.k * math.pi / (self.l * self.constants.m)
        if self.pulse == "pi2":
            return self.constants.hbar * self.k * math.pi / (2.0 * self.l * self.constants.m)
        return float(self.pulse)

    @property
    def flight_time(self) -> float:
        """Classical in-field transit time l m / (hbar k) = l / v."""
        return self.l / self.v

    @property
    def gap_time(self) -> float:
        return self.L / self.v

    @property
    def gap_ratio(self) -> float:
        return self.L / self.l

    @property
    def span(self) -> tuple[float, float]:
        """Coordinates of the full scattering region: field 1 at [0, l], field 2 at [l+L, 2l+L]."""
        if self.geometry == "rabi":
            return (0.0, self.l)
        return (0.0, 2.0 * self.l + self.L)

    def wavenumbers(self, delta: float) -> ChannelWavenumbers:
        return channel_wavenumbers(self.k, delta, self.omega, self.constants)

    def energy_over_coupling(self) -> float:
        """E / (hbar Omega); >> 1 in the perturbative regime."""
        return self.constants.kinetic_energy(self.v) / (self.constants.hbar * self.omega)
