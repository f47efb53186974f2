import numpy as np

from clockshift.core import PhysicalConstants, ScenarioConfig

DIMLESS = PhysicalConstants.dimensionless()


def random_scenario(rng, kl_min=3.0, kl_max=3e5, ramsey_prob=0.5, ramsey_kl_max=None, n_max=6.0):
    """Random dimensionless scenario, incident wavenumber log-uniform in [kl_min, kl_max]."""
    geometry = "ramsey" if rng.random() < ramsey_prob else "rabi"
    hi = kl_max if geometry == "rabi" or ramsey_kl_max is None else ramsey_kl_max
    k = float(np.exp(rng.uniform(np.log(kl_min), np.log(hi))))
    gap = float(rng.uniform(1.0, n_max)) if geometry == "ramsey" else 0.0
    pulse = ("pi", "pi2", float(rng.uniform(0.3, 3.0)) * np.pi * k)[int(rng.integers(0, 3))]
    return ScenarioConfig(v=k, l=1.0, L=gap, pulse=pulse, geometry=geometry, constants=DIMLESS)


def random_open_detuning(rng, config, span=2.0):
    """Detuning with an open excited channel, clear of mode thresholds."""
    for _ in range(500):
        d = float(rng.uniform(-span, span)) * config.omega
        wn = config.wavenumbers(d)
        if wn.q.real > 1e-3 * wn.k and min(abs(wn.k_plus), abs(wn.k_minus)) > 1e-3 * wn.k:
            return d
    raise RuntimeError("no open-channel detuning found for this scenario")
