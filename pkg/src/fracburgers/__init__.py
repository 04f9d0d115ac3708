"""Numerical lab for the viscous fractional Burgers equation on a periodic domain."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConstructionError,
    ContractViolation,
    FracBurgersError,
    InfeasibleError,
    ParameterError,
    ResampleError,
)
from .field import SpectralField  # noqa: E402
from .fraclap import FracLapParams, apply_singular_integral, apply_spectral  # noqa: E402
from .solver import InitialData, SolverConfig, Trajectory, run  # noqa: E402

__all__ = [
    "__version__",
    "ConstructionError",
    "ContractViolation",
    "FracBurgersError",
    "InfeasibleError",
    "ParameterError",
    "ResampleError",
    "SpectralField",
    "FracLapParams",
    "apply_singular_integral",
    "apply_spectral",
    "InitialData",
    "SolverConfig",
    "Trajectory",
    "run",
]
