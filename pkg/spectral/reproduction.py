"""
Reproduction numbers and spectral-bound utilities built on spectral_radius.

The next-generation matrix of a model has entries
kernel[x, y] * weights[y] / gamma[y].
"""
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Optional

import numpy as np
from scipy.optimize import brentq

from config.constants import SUPERSOLUTION_SLACK, SpectralSign
from config.settings import get_settings
from core.errors import (
    ConsistencyError,
    ConvergenceError,
    DomainError,
    InputError,
    PreconditionError,
)
from core.model import SISModel, SubsetMask, as_mask, as_state, as_vector, full_mask
from spectral.perron import spectral_radius

if TYPE_CHECKING:
    from structure.atoms import AtomDecomposition

logger = logging.getLogger(__name__)


def _masked_radius(matrix: np.ndarray, A: SubsetMask, tol: Optional[float]) -> float:
    idx = np.flatnonzero(A)
    if idx.size == 0:
        return 0.0
    return spectral_radius(matrix[np.ix_(idx, idx)], tol).radius


def R0(model: SISModel, A: Optional[SubsetMask] = None, tol: Optional[float] = None) -> float:
    """
    Basic reproduction number of the subset A.

    Args:
        model: SIS model
        A: Subset mask, whole feature set when None
        tol: Spectral tolerance

    Returns:
        rho of the next-generation matrix projected on A (exactly 0 for empty A)
    """
    mask = full_mask(model.n) if A is None else as_mask(model, A)
    return _masked_radius(model.next_generation, mask, tol)


def Re(model: SISModel, eta: Iterable[float], tol: Optional[float] = None) -> float:
    """
    Effective reproduction number under the vaccination profile eta.

    Args:
        model: SIS model
        eta: Proportion of each feature still susceptible to infection, in [0, 1]

    Returns:
        rho(T M_{1/gamma} M_eta)
    """
    eta = as_state(model, eta)
    return spectral_radius(model.next_generation * eta[np.newaxis, :], tol).radius


def equilibrium_operator(model: SISModel, g: Iterable[float]) -> np.ndarray:
    """
    Linear operator L_g = M_phi(g) T M_{1/gamma} at a state g.

    g is an equilibrium iff L_g (gamma g) = gamma g, and rho(L_g) = Re(phi(g)).
    """
    g = as_state(model, g)
    return model.incidence(g)[:, np.newaxis] * model.next_generation


@dataclass
class EquilibriumEigenCheck:
    """gamma g as a nonnegative eigenvector of L_g."""
    eigen_residual: float
    rho: float
    rho_on_support: float
    support_size: int
    tol: float

    @property
    def is_eigenvector(self) -> bool:
        return self.eigen_residual <= self.tol

    @property
    def unit_radius_on_support(self) -> bool:
        if self.support_size == 0:
            return True
        return abs(self.rho_on_support - 1.0) <= self.tol and self.rho >= self.rho_on_support - self.tol

    @property
    def passed(self) -> bool:
        return self.is_eigenvector and self.unit_radius_on_support

    def to_dict(self) -> dict:
        return {
            "eigen_residual": self.eigen_residual,
            "rho": self.rho,
            "rho_on_support": self.rho_on_support,
            "support_size": self.support_size,
            "passed": self.passed,
        }


def check_equilibrium_eigenpair(
    model: SISModel,
    g: Iterable[float],
    tol: Optional[float] = None,
) -> EquilibriumEigenCheck:
    """
    Check L_g (gamma g) = gamma g and, for g != 0, rho(L_g restricted to supp g) = 1.

    Args:
        model: SIS model
        g: Candidate equilibrium
        tol: Tolerance on both identities

    Returns:
        EquilibriumEigenCheck
    """
    config = get_settings().dynamics
    tol = config.critical_identity_tol if tol is None else tol
    g = as_state(model, g)
    L = equilibrium_operator(model, g)
    gg = model.gamma * g
    A = g > config.support_tol
    return EquilibriumEigenCheck(
        eigen_residual=float(np.max(np.abs(L @ gg - gg))),
        rho=spectral_radius(L).radius,
        rho_on_support=_masked_radius(L, A, None),
        support_size=int(A.sum()),
        tol=tol,
    )


def schwartz_radius(
    model: SISModel,
    decomposition: "AtomDecomposition",
    A: SubsetMask,
    tol: Optional[float] = None,
) -> float:
    """
    R0(A) computed as the largest atom reproduction number inside A.

    Raises:
        DomainError: A is not a union of atoms
    """
    mask = as_mask(model, A)
    if not decomposition.is_admissible(mask):
        raise DomainError("set is not a union of atoms; R0 by atoms is undefined for it")
    inside = [atom.r0 for atom in decomposition.atoms if not atom.is_zero and mask[atom.members].all()]
    return max(inside, default=0.0)


# ==================== Spectral bound ====================

@dataclass
class SpectralBound:
    """Sign of s(T - gamma) with the R0 cross-check."""
    sign: SpectralSign
    value: float
    r0: float
    shift: float
    consistent: bool

    def to_dict(self) -> dict:
        return {
            "sign": self.sign.value,
            "value": self.value,
            "r0": self.r0,
            "shift": self.shift,
            "consistent": self.consistent,
        }


def _shifted_generator(model: SISModel) -> tuple[np.ndarray, float]:
    """T - M_gamma + c I with c = max gamma + 1, nonnegative."""
    c = float(model.gamma.max()) + 1.0
    return model.matrix - np.diag(model.gamma) + c * np.eye(model.n), c


def _sign(value: float, band: float) -> SpectralSign:
    if abs(value) <= band:
        return SpectralSign.ZERO
    return SpectralSign.POSITIVE if value > 0 else SpectralSign.NEGATIVE


def spectral_bound_sign(model: SISModel, tol: Optional[float] = None) -> SpectralBound:
    """
    Sign of the spectral bound s(T - gamma).

    With gamma > 0 the sign agrees with the sign of R0 - 1; the result
    records whether the two computations agree.
    """
    tol = get_settings().spectral.tol if tol is None else tol
    shifted, c = _shifted_generator(model)
    value = spectral_radius(shifted, tol).radius - c
    sign = _sign(value, 2.0 * tol)
    r0 = R0(model, tol=tol)
    r0_sign = _sign(r0 - 1.0, 2.0 * tol)
    consistent = sign == r0_sign
    if not consistent:
        logger.warning(f"s(T - gamma) = {value:.3e} and R0 - 1 = {r0 - 1.0:.3e} disagree in sign")
    return SpectralBound(sign=sign, value=value, r0=r0, shift=c, consistent=consistent)


# ==================== Eigenpair of T - gamma ====================

@dataclass
class Eigenpair:
    """Positive eigenvalue lam and nonnegative w with T w - gamma w = lam w."""
    lam: float
    w: np.ndarray
    psi_root: float
    residual: float

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "w": self.w.tolist(), "psi_root": self.psi_root, "residual": self.residual}


def psi(model: SISModel, a: float, tol: Optional[float] = None) -> float:
    """rho(T M_{1/(gamma + a)})."""
    return spectral_radius(model.matrix / (model.gamma + a)[np.newaxis, :], tol).radius


def supersolution_eigenpair(model: SISModel, tol: Optional[float] = None) -> Eigenpair:
    """
    Eigenpair of T - gamma for a supercritical model.

    The eigenvalue is located as the root a of psi(a) = 1 on [0, max row
    sum of T]; the eigenvector comes from the Perron vector of the shifted
    generator and must reproduce the same eigenvalue.

    Raises:
        PreconditionError: R0 <= 1
        ConvergenceError: Root bracketing failed
        ConsistencyError: The two eigenvalue computations disagree
    """
    config = get_settings().spectral
    tol = config.tol if tol is None else tol
    r0 = R0(model, tol=tol)
    if r0 <= 1.0 + config.psi_tol:
        raise PreconditionError(f"supersolution eigenpair needs R0 > 1, got R0 = {r0:.12g}")

    upper = float(np.max(model.matrix.sum(axis=1)))
    try:
        a, info = brentq(
            lambda x: psi(model, x, tol) - 1.0, 0.0, upper, xtol=1e-14, full_output=True
        )
    except ValueError as e:
        raise ConvergenceError(f"psi(a) = 1 is not bracketed on [0, {upper:.6g}]: {e}")
    if not info.converged:
        raise ConvergenceError(f"psi root search did not converge after {info.iterations} iterations",
                               best_estimate=float(a))
    psi_gap = abs(psi(model, a, tol) - 1.0)
    if psi_gap > config.psi_tol:
        logger.warning(f"|psi(a) - 1| = {psi_gap:.3e} exceeds {config.psi_tol:g}")

    shifted, c = _shifted_generator(model)
    result = spectral_radius(shifted, tol, want_vector=True)
    if result.eigenvector is None:
        raise ConvergenceError("no nonnegative eigenvector for the spectral bound", best_estimate=float(a))
    lam = result.radius - c
    if abs(lam - a) > max(1e3 * tol, config.psi_tol):
        raise ConsistencyError(f"spectral bound {lam:.12g} differs from psi root {a:.12g}")

    w = result.eigenvector
    residual = float(np.max(np.abs(model.matrix @ w - model.gamma * w - lam * w)))
    logger.debug(f"Eigenpair lambda = {lam:.12g} (psi root {a:.12g}), residual {residual:.3e}")
    return Eigenpair(lam=lam, w=w, psi_root=float(a), residual=residual)


# ==================== Supersolution certificates ====================

@dataclass
class SupersolutionCertificate:
    """Outcome of testing S v >= lam v with S the next-generation matrix."""
    certified: bool
    lam: float
    refinement: Optional[str] = None
    min_margin: float = 0.0
    offending_index: Optional[int] = None
    offending_label: Optional[str] = None

    def __bool__(self) -> bool:
        return self.certified

    @property
    def conclusion(self) -> str:
        if not self.certified:
            return f"refused at {self.offending_label}"
        if self.refinement == "equality":
            return f"rho = {self.lam:.12g}"
        if self.refinement == "strict":
            return f"rho > {self.lam:.12g}"
        return f"rho >= {self.lam:.12g}"

    def to_dict(self) -> dict:
        return {
            "certified": self.certified,
            "lambda": self.lam,
            "refinement": self.refinement,
            "min_margin": self.min_margin,
            "offending_index": self.offending_index,
            "offending_label": self.offending_label,
            "conclusion": self.conclusion,
        }


def check_supersolution(
    model: SISModel,
    v: Iterable[float],
    lam: float,
    slack: float = SUPERSOLUTION_SLACK,
) -> SupersolutionCertificate:
    """
    Certify rho(S_{supp v}) >= lam from S v >= lam v.

    Args:
        model: SIS model
        v: Nonnegative, nonzero vector
        lam: Positive candidate eigenvalue
        slack: Allowed entrywise shortfall

    Returns:
        SupersolutionCertificate; refinement is "equality" when S v = lam v on
        supp(v), "strict" when S v > lam v there, otherwise "bound"
    """
    v = as_vector(model, v, "v")
    if np.any(v < 0.0) or not np.any(v > 0.0):
        raise InputError("supersolution candidate must be nonnegative and nonzero")
    if lam <= 0.0:
        raise InputError(f"lambda must be positive, got {lam}")

    margin = model.next_generation @ v - lam * v
    worst = int(np.argmin(margin))
    if margin[worst] < -slack:
        logger.debug(f"Supersolution refused at feature {model.labels[worst]} (margin {margin[worst]:.3e})")
        return SupersolutionCertificate(
            certified=False,
            lam=lam,
            min_margin=float(margin[worst]),
            offending_index=worst,
            offending_label=model.labels[worst],
        )

    on_support = margin[v > 0.0]
    if np.all(np.abs(on_support) <= slack):
        refinement = "equality"
    elif np.all(on_support > slack):
        refinement = "strict"
    else:
        refinement = "bound"
    return SupersolutionCertificate(
        certified=True,
        lam=lam,
        refinement=refinement,
        min_margin=float(margin.min()),
    )
