"""
Core module containing the model types and the error hierarchy.

Model types live in core.model; import them from there.
"""
from core.errors import (
    SISError,
    InputError,
    DimensionError,
    ModelValidationError,
    DomainError,
    PreconditionError,
    ResourceCapError,
    ConvergenceError,
    ConsistencyError,
    MonotonicityError,
)

__all__ = [
    "SISError",
    "InputError",
    "DimensionError",
    "ModelValidationError",
    "DomainError",
    "PreconditionError",
    "ResourceCapError",
    "ConvergenceError",
    "ConsistencyError",
    "MonotonicityError",
]
