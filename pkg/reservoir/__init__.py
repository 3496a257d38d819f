"""
Reservoir model: SIS dynamics with an external source of infection.
"""
from reservoir.model import (
    ReservoirModel,
    augment,
    augmented_state,
    reservoir_vector_field,
    integrate_reservoir,
    integrate_direct,
    homogeneous_equilibrium,
)
from reservoir.equilibria import ReservoirStructure, reservoir_equilibria, reservoir_predict_limit

__all__ = [
    "ReservoirModel",
    "augment",
    "augmented_state",
    "reservoir_vector_field",
    "integrate_reservoir",
    "integrate_direct",
    "homogeneous_equilibrium",
    "ReservoirStructure",
    "reservoir_equilibria",
    "reservoir_predict_limit",
]
