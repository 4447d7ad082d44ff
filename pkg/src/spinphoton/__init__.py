"""Simulator and fitting toolkit for a cavity-coupled spin-photon interface.

Submodules:

* units        -- constants and unit conversions (ueV / ns conventions)
* cavity       -- single-sided cavity reflection with an optional emitter
* polarization -- Jones vectors, circular intensities, phase shifts
* spindyn      -- lambda-system rate equations and spin pumping
* saturation   -- coherent-fraction rolloff of the phase shift with power
* fitting      -- least-squares engine, lineshapes, calibrations
* scenarios    -- end-to-end sweeps producing deterministic traces
* config, cli  -- flat-file configuration and the command-line tool
"""

__version__ = "0.1.0"

from .cavity import CavityMode, EmitterCoupling, g_from_cooperativity, reflection_coefficient
from .polarization import (
    CircularIntensities,
    PolarizationState,
    circular_intensities,
    phase_shift,
    polarization_contrast,
    rcp_input,
    reflect_state,
)
from .scenarios import ExperimentConfig, Trace
from .spindyn import Populations, RateParams, SpinFlipLaw

__all__ = [
    "__version__",
    "CavityMode",
    "CircularIntensities",
    "EmitterCoupling",
    "ExperimentConfig",
    "PolarizationState",
    "Populations",
    "RateParams",
    "SpinFlipLaw",
    "Trace",
    "circular_intensities",
    "g_from_cooperativity",
    "phase_shift",
    "polarization_contrast",
    "rcp_input",
    "reflect_state",
    "reflection_coefficient",
]
