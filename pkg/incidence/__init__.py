"""
Incidence functions phi.

Each family is a small IncidenceFunction subclass; check_conformity tests
the normalization and monotonicity conditions on a grid.
"""
from incidence.base import IncidenceFunction, ConformityReport
from incidence.families import (
    MassAction,
    LondonYorke,
    Power,
    Saturation,
    ExponentialSaturation,
    LogSaturation,
    CapassoSerio,
    Custom,
    G_FORMS,
    mass_action,
    london_yorke,
    power,
    saturation,
    exponential_saturation,
    log_saturation,
    capasso_serio,
    custom,
    evaluate,
    from_config,
)
from incidence.conformity import check_conformity

__all__ = [
    "IncidenceFunction",
    "ConformityReport",
    "MassAction",
    "LondonYorke",
    "Power",
    "Saturation",
    "ExponentialSaturation",
    "LogSaturation",
    "CapassoSerio",
    "Custom",
    "G_FORMS",
    "mass_action",
    "london_yorke",
    "power",
    "saturation",
    "exponential_saturation",
    "log_saturation",
    "capasso_serio",
    "custom",
    "evaluate",
    "from_config",
    "check_conformity",
]
