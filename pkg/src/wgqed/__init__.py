"""Simulation and analysis of photon-mediated interactions between
two-level emitters in an open one-dimensional waveguide."""

from .geometry import (
    DriveSpec,
    EffectiveModel,
    Geometry,
    RateSet,
    build_effective_model,
    correlated_decay,
    exchange_rate,
)
from .lindblad import (
    DegenerateSteadyState,
    NumericalError,
    evolve,
    expectation,
    liouvillian,
    steady_state,
)
from .scattering import ScatterPoint, sweep_elastic, transmission_reflection
from .spectra import SpectrumTrace, emission_spectrum, strip_coherent
from .transmon import LineParams, TransmonParams, coupling_g, derive_energies, frequency_at_flux

__version__ = "0.1.0"
