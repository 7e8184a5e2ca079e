"""Spectra, steady states and extended-space solvers for periodically driven Lindblad models."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigurationError,
    ContractError,
    DegenerateSteadyStateError,
    DimensionError,
    DomainError,
    EngineError,
    ExtractionError,
    IntegrityError,
    NumericalError,
    ValidationError,
)
from .model import Jump, LindbladModel, amplitude_damping, static_model, validate  # noqa: E402
from .propagator import PropagatorConfig, floquet_operator, propagate, stroboscopic_split  # noqa: E402
from .sambe import SambeConfig, build_sf_hamiltonian, rwa_reduce, sf_quasienergies, sf_steady_state, solve_sf_lindblad  # noqa: E402
from .spectral import (  # noqa: E402
    decompose, detect_jordan, eigenmode_trajectory, extract_ness, ness_for_model, nondecaying_projection,
)
from .superop import Superoperator, build_liouvillian  # noqa: E402

__all__ = [
    "ConfigurationError", "ContractError", "DegenerateSteadyStateError", "DimensionError", "DomainError",
    "EngineError", "ExtractionError", "IntegrityError", "NumericalError", "ValidationError",
    "Jump", "LindbladModel", "amplitude_damping", "static_model", "validate",
    "PropagatorConfig", "floquet_operator", "propagate", "stroboscopic_split",
    "SambeConfig", "build_sf_hamiltonian", "rwa_reduce", "sf_quasienergies", "sf_steady_state", "solve_sf_lindblad",
    "decompose", "detect_jordan", "eigenmode_trajectory", "extract_ness", "ness_for_model", "nondecaying_projection",
    "Superoperator", "build_liouvillian",
]
