"""Simulation of a single-photon micro-optomechanical superposition experiment."""

__version__ = "0.1.0"

from .constants import CONSTANTS, constants_hash
from .errors import (
    CatwigError,
    ConfigurationError,
    ConvergenceError,
    DomainError,
    GridError,
    IngestionError,
    ValidationError,
)
from .params import DerivedQuantities, PhysicalParams, derive_quantities, mean_phonon

__all__ = [
    "CONSTANTS",
    "CatwigError",
    "ConfigurationError",
    "ConvergenceError",
    "DerivedQuantities",
    "DomainError",
    "GridError",
    "IngestionError",
    "PhysicalParams",
    "ValidationError",
    "constants_hash",
    "derive_quantities",
    "mean_phonon",
]
