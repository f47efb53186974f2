"""4x4 transfer-matrix engine for one and two field zones.

Region matrices stack the two channel amplitudes and their spatial
derivatives; a block transfer matrix connects the plane-wave coefficient
vectors (a, b, c, d) on both sides of a field zone.  All inversions are
linear solves with partial pivoting on row-balanced matrices, never
explicit cofactor inverses.

Coordinates put field 1 at [0, l] and field 2 at [l+L, 2l+L].  Absolute
phases k*x stay below ~1e6 rad at desk scales, which double precision
handles; the gauge-invariance test in the suite guards this.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import ChannelWavenumbers, DressedPair, ScenarioConfig, dressed_pair

logger = logging.getLogger(__name__)

_NORM = 1.0 / math.sqrt(2.0 * math.pi)
_COND_WARN = 1e8


class ThresholdError(ValueError):
    """A channel or mode wavenumber sits at (or numerically at) threshold."""


@dataclass(frozen=True)
class RegionMatrix:
    """Map from coefficient vector (a, b, c, d) to (phi1, phi2, phi1', phi2') at x."""

    entries: np.ndarray
    kind: str           # "free" or "field"
    x: float


@dataclass(frozen=True)
class TransferMatrix:
    """Coefficient-vector map v_left = T v_right across [x_left, x_right]."""

    entries: np.ndarray
    span: tuple[float, float]


@dataclass(frozen=True)
class ScatteringAmplitudes:
    """Reflection/transmission amplitudes for left incidence in the ground state.

    flux_weights are the outgoing-current factors (1, Re q / k) of the ground
    and excited channels; a closed excited channel carries zero weight.
    """

    r11: complex
    r12: complex
    t11: complex
    t12: complex
    flux_weights: tuple[float, float]

    @property
    def flux_sum(self) -> float:
        w1, w2 = self.flux_weights
        return (
            w1 * (abs(self.r11) ** 2 + abs(self.t11) ** 2)
            + w2 * (abs(self.r12) ** 2 + abs(self.t12) ** 2)
        )

    @property
    def excitation(self) -> float:
        """Transmitted excited-channel flux (Re q / k) |t12|^2."""
        return self.flux_weights[1] * abs(self.t12) ** 2


def _recip_phase_pair(kappa: complex, x: float) -> tuple[complex, complex]:
    # e^{+i kappa x} and e^{-i kappa x} as an exact reciprocal pair, so a
    # phase unit stays a pure relabeling of the origin.
    p = complex(np.exp(1j * complex(kappa) * x))
    return p, 1.0 / p


def m0_matrix(x: float, k: float, q: complex) -> RegionMatrix:
    """Free-region matrix: plane waves e^{+-ikx} in channel 1, e^{+-iqx} in channel 2."""
    if k <= 0.0:
        raise ValueError("ground-channel wavenumber k must be positive")
    if q == 0:
        raise ThresholdError("excited channel at threshold (q = 0): free matrix is singular")
    pk, mk = _recip_phase_pair(k, x)
    pq, mq = _recip_phase_pair(q, x)
    ik = 1j * k
    iq = 1j * q
    entries = _NORM * np.array(
        [
            [pk, mk, 0.0, 0.0],
            [0.0, 0.0, pq, mq],
            [ik * pk, -ik * mk, 0.0, 0.0],
            [0.0, 0.0, iq * pq, -iq * mq],
        ],
        dtype=complex,
    )
    return RegionMatrix(entries=entries, kind="free", x=x)


def mb_matrix(x: float, wn: ChannelWavenumbers, dp: DressedPair) -> RegionMatrix:
    """Field-region matrix: dressed modes e^{+-ik_pm x} with eigenvector weights 2*lambda_pm/omega."""
    if wn.k_plus == 0 or wn.k_minus == 0:
        raise ThresholdError("dressed mode at threshold (k_pm = 0): field matrix is singular")
    up = dp.eigvec_plus[1]
    um = dp.eigvec_minus[1]
    pp, mp = _recip_phase_pair(wn.k_plus, x)
    pm, mm = _recip_phase_pair(wn.k_minus, x)
    ikp = 1j * wn.k_plus
    ikm = 1j * wn.k_minus
    entries = _NORM * np.array(
        [
            [pp, mp, pm, mm],
            [up * pp, up * mp, um * pm, um * mm],
            [ikp * pp, -ikp * mp, ikm * pm, -ikm * mm],
            [up * ikp * pp, -up * ikp * mp, um * ikm * pm, -um * ikm * mm],
        ],
        dtype=complex,
    )
    return RegionMatrix(entries=entries, kind="field", x=x)


def balanced_condition(rm: RegionMatrix) -> float:
    """Condition number after scaling the derivative rows to the amplitude rows.

    The raw condition number of a region matrix scales with the wavenumbers
    and therefore with the unit system; balancing divides rows 3-4 by the
    largest mode wavenumber, leaving the physically meaningful mode-mixing
    conditioning.
    """
    entries = rm.entries.copy()
    scale = max(np.max(np.abs(entries[2])), np.max(np.abs(entries[3])))
    if scale > 0.0:
        entries[2:] /= scale
    norm = np.max(np.abs(entries[:2])) or 1.0
    entries[:2] /= norm
    return float(np.linalg.cond(entries))


def _balanced(entries: np.ndarray, k_ref: float) -> np.ndarray:
    scaled = entries.copy()
    scaled[2:] /= k_ref
    return scaled


def _phase_unit_free(wn: ChannelWavenumbers, x: float) -> np.ndarray:
    pk, mk = _recip_phase_pair(wn.k, x)
    pq, mq = _recip_phase_pair(wn.q, x)
    return np.array([pk, mk, pq, mq], dtype=complex)


def _phase_unit_field(wn: ChannelWavenumbers, x: float) -> np.ndarray:
    pp, mp = _recip_phase_pair(wn.k_plus, x)
    pm, mm = _recip_phase_pair(wn.k_minus, x)
    return np.array([pp, mp, pm, mm], dtype=complex)


def block_transfer(x1: float, x2: float, wn: ChannelWavenumbers, dp: DressedPair) -> TransferMatrix:
    """Transfer matrix M0(x1)^-1 Mb(x1) Mb(x2)^-1 M0(x2) across one field zone.

    Evaluated in factored form: position dependence is peeled off into
    diagonal phase units (M(x) = M(0) D(x)), so the pivoted solves act on the
    x-independent, row-balanced basis matrices and the large absolute phases
    enter only through exactly reciprocal diagonal pairs.
    """
    if not x2 > x1:
        raise ValueError("block_transfer requires x2 > x1")
    m0 = m0_matrix(0.0, wn.k, wn.q)
    mb = mb_matrix(0.0, wn, dp)
    k_ref = max(
        abs(wn.k), abs(wn.q), abs(wn.k_plus), abs(wn.k_minus)
    )
    m0s = _balanced(m0.entries, k_ref)
    mbs = _balanced(mb.entries, k_ref)
    for name, mat in (("M0", m0s), ("Mb", mbs)):
        cond = np.linalg.cond(mat)
        if cond > _COND_WARN:
            logger.warning("%s basis matrix badly conditioned: cond=%.3e", name, cond)
    free_to_field = np.linalg.solve(m0s, mbs)    # M0(0)^-1 Mb(0)
    field_to_free = np.linalg.solve(mbs, m0s)    # Mb(0)^-1 M0(0)
    core = free_to_field * _phase_unit_field(wn, x1 - x2) @ field_to_free
    entries = (_phase_unit_free(wn, -x1)[:, None] * core) * _phase_unit_free(wn, x2)
    return TransferMatrix(entries=entries, span=(x1, x2))


def total_transfer(config: ScenarioConfig, delta: float) -> TransferMatrix:
    """Transfer matrix of the whole scenario (one zone, or two zones composed).

    The free region between Ramsey zones shares a single coefficient vector,
    so the two field blocks compose by plain matrix multiplication.  A zero
    Rabi frequency leaves every region free and the transfer is the identity.
    """
    omega = config.omega
    if omega == 0.0:
        return TransferMatrix(entries=np.eye(4, dtype=complex), span=config.span)
    wn = config.wavenumbers(delta)
    dp = dressed_pair(delta, omega)
    if config.geometry == "rabi":
        return block_transfer(0.0, config.l, wn, dp)
    first = block_transfer(0.0, config.l, wn, dp)
    second = block_transfer(config.l + config.L, 2.0 * config.l + config.L, wn, dp)
    return TransferMatrix(entries=first.entries @ second.entries, span=config.span)


def scattering_amplitudes(T: TransferMatrix, wn: ChannelWavenumbers) -> ScatteringAmplitudes:
    """Extract r11, r12, t11, t12 from v_I = T v_III with v_III = (t11, 0, t12, 0).

    t12 = T31 / (T31 T13 - T33 T11); a vanishing denominator marks a channel
    threshold or degeneracy and is reported as ThresholdError.
    """
    t = T.entries
    prod_a = t[2, 0] * t[0, 2]
    prod_b = t[2, 2] * t[0, 0]
    den = prod_a - prod_b
    scale = max(abs(prod_a), abs(prod_b))
    if scale > 0.0 and abs(den) < 1e-14 * scale:
        raise ThresholdError("near-singular amplitude extraction: channel threshold or degeneracy")
    if scale == 0.0:
        raise ThresholdError("degenerate transfer matrix: no transmission solution")
    t12 = t[2, 0] / den
    if t[0, 0] != 0:
        t11 = (1.0 - t[0, 2] * t12) / t[0, 0]
    else:
        t11 = -t[2, 2] * t12 / t[2, 0]
    r11 = t[1, 0] * t11 + t[1, 2] * t12
    r12 = t[3, 0] * t11 + t[3, 2] * t12
    return ScatteringAmplitudes(
        r11=complex(r11),
        r12=complex(r12),
        t11=complex(t11),
        t12=complex(t12),
        flux_weights=(1.0, wn.q.real / wn.k),
    )


def excitation_probability(config: ScenarioConfig, delta: float) -> float:
    """Quantum excitation probability (Re q / k) |t12|^2.

    Returns exactly 0 for a closed excited channel (imaginary q carries no
    transmitted flux).
    """
    wn = config.wavenumbers(delta)
    amps = scattering_amplitudes(total_transfer(config, delta), wn)
    return amps.excitation
