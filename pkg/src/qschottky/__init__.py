"""Simulation library for phenomenological quantum thermodynamics of
discrete (Schottky) systems: density-operator dynamics with time-dependent
ensemble weights, contact temperature, entropy bookkeeping, and bipartite
compound-system exchange splits."""

from ._kernels import USING_NUMBA
from .bipartite import (
    BipartiteSystem,
    CompoundHamiltonian,
    TemperatureSet,
    WorkState,
    canonical,
    microcanonical,
)
from .constitutive import ConstitutiveModel, HeatConduction
from .ensemble import Ensemble, Frame, RateSplit
from .errors import QSchottkyError
from .simulate import PiecewiseLinear, Scenario, Schedule, Trajectory, run

__version__ = "0.1.0"

__all__ = [
    "USING_NUMBA",
    "BipartiteSystem",
    "CompoundHamiltonian",
    "TemperatureSet",
    "WorkState",
    "canonical",
    "microcanonical",
    "ConstitutiveModel",
    "HeatConduction",
    "Ensemble",
    "Frame",
    "RateSplit",
    "QSchottkyError",
    "PiecewiseLinear",
    "Scenario",
    "Schedule",
    "Trajectory",
    "run",
    "__version__",
]
