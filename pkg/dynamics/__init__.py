"""
Semi-flow integration, maximal equilibria and limit prediction.
"""
from dynamics.integrator import DormandPrince, Trajectory, integrate
from dynamics.equilibrium import (
    EquilibriumRecord,
    SupportObservation,
    maximal_equilibrium,
    predict_limit,
    closed_form_continuum_flow,
    continuum_equilibrium,
    support_of_flow,
)
from dynamics.verification import (
    VerificationReport,
    MonotoneFlowReport,
    verify_limit,
    fit_decay_rate,
    check_monotone_flow,
    check_descent_from_top,
)

__all__ = [
    "DormandPrince",
    "Trajectory",
    "integrate",
    "EquilibriumRecord",
    "SupportObservation",
    "maximal_equilibrium",
    "predict_limit",
    "closed_form_continuum_flow",
    "continuum_equilibrium",
    "support_of_flow",
    "VerificationReport",
    "MonotoneFlowReport",
    "verify_limit",
    "fit_decay_rate",
    "check_monotone_flow",
    "check_descent_from_top",
]
