"""
Perron-root machinery: spectral radius and reproduction numbers.
"""
from spectral.perron import SpectralResult, spectral_radius
from spectral.reproduction import (
    R0,
    Re,
    schwartz_radius,
    SpectralBound,
    spectral_bound_sign,
    Eigenpair,
    psi,
    supersolution_eigenpair,
    SupersolutionCertificate,
    check_supersolution,
    equilibrium_operator,
    EquilibriumEigenCheck,
    check_equilibrium_eigenpair,
)

__all__ = [
    "SpectralResult",
    "spectral_radius",
    "R0",
    "Re",
    "schwartz_radius",
    "SpectralBound",
    "spectral_bound_sign",
    "Eigenpair",
    "psi",
    "supersolution_eigenpair",
    "SupersolutionCertificate",
    "check_supersolution",
    "equilibrium_operator",
    "EquilibriumEigenCheck",
    "check_equilibrium_eigenpair",
]
