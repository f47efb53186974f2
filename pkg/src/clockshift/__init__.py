"""Quantum-motion resonance shifts of Rabi and Ramsey atomic-clock fringes.

Exact transfer-matrix solution of a two-level atom crossing one or two
constant-field zones, semiclassical baselines, and extraction of the
maximum and half-height-midpoint shifts as fractional clock errors.
"""

from importlib.metadata import PackageNotFoundError, version

from .core import (
    ChannelWavenumbers,
    DressedPair,
    PhysicalConstants,
    ScenarioConfig,
    channel_wavenumbers,
    dressed_pair,
    effective_detuning,
    from_hz,
    peres_bound,
    to_hz,
)
from .curves import ResonanceCurve, default_delta_grid, quantum_curve, semiclassical_resonance_curve
from .experiments import (
    FitResult,
    SweepSpec,
    Table,
    fit_inverse_square,
    run_curve,
    run_grid,
    run_shift_sweep,
    write_table,
)
from .ode import StepControl, integrate_sse
from .semiclassical import SemiclassicalCurve, rabi_scl, ramsey_scl, semiclassical_curve
from .shifts import (
    BracketError,
    ExpansionCoefficients,
    HalfHeightError,
    ShiftResult,
    analytic_max_shift_rabi,
    analytic_max_shift_rabi_envelope,
    analytic_max_shift_ramsey_envelope,
    gamma_expansion,
    half_height_shift,
    half_height_shift_estimate,
    peak_shift,
    velocity_average,
)
from .transfer import (
    RegionMatrix,
    ScatteringAmplitudes,
    ThresholdError,
    TransferMatrix,
    block_transfer,
    excitation_probability,
    m0_matrix,
    mb_matrix,
    scattering_amplitudes,
    total_transfer,
)

try:
    __version__ = version("clockshift")
except PackageNotFoundError:
    __version__ = "0.0.0+src"
