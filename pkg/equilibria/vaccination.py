"""
Vaccination identities, monatomicity by equilibrium counts, and escape from
non-maximal equilibria.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from config.settings import get_settings
from core.errors import PreconditionError
from core.model import SISModel, mask_labels, project_model, vector_field
from dynamics.equilibrium import EquilibriumRecord
from dynamics.integrator import integrate
from equilibria.catalog import EquilibriumCatalog, equilibrium_catalog
from spectral.reproduction import (
    R0,
    EquilibriumEigenCheck,
    Re,
    check_equilibrium_eigenpair,
    supersolution_eigenpair,
)
from structure.atoms import AtomDecomposition, decompose, is_monatomic

logger = logging.getLogger(__name__)


@dataclass
class VaccinationEntry:
    """Re(phi(h)) for one equilibrium."""
    antichain: str
    re_phi: float
    is_maximal: bool
    is_dfe: bool
    expected: str
    ok: bool
    eigen: Optional[EquilibriumEigenCheck] = None

    def to_dict(self) -> dict:
        return {
            "antichain": self.antichain,
            "re_phi": self.re_phi,
            "is_maximal": self.is_maximal,
            "is_dfe": self.is_dfe,
            "expected": self.expected,
            "ok": self.ok,
            "eigen": self.eigen.to_dict() if self.eigen is not None else None,
        }


@dataclass
class VaccinationReport:
    """Critical vaccination identity over a catalog."""
    model_name: str
    r0: float
    entries: list[VaccinationEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.ok for e in self.entries)

    @property
    def violations(self) -> list[VaccinationEntry]:
        return [e for e in self.entries if not e.ok]

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "r0": self.r0,
            "passed": self.passed,
            "entries": [e.to_dict() for e in self.entries],
        }

    def format_report(self) -> str:
        lines = [f"Critical vaccination check of '{self.model_name}' (R0 = {self.r0:.10f})"]
        for e in self.entries:
            tag = " [g*]" if e.is_maximal else (" [DFE]" if e.is_dfe else "")
            status = "ok" if e.ok else "VIOLATION"
            lines.append(f"  {e.antichain:<24}{tag:<7} Re(phi(g)) = {e.re_phi:.6f}   expected {e.expected:<10} {status}")
        return "\n".join(lines)


def critical_vaccination_check(
    model: SISModel,
    catalog: EquilibriumCatalog,
    tol: Optional[float] = None,
) -> VaccinationReport:
    """
    Check Re(phi(g*)) = 1 when R0 > 1, Re(phi(h)) > 1 for the other non-null
    equilibria and Re(phi(0)) = R0.

    Every record must also make gamma g an eigenvector of L_g with
    rho(L_g) = 1 on supp g.
    """
    tol = get_settings().dynamics.critical_identity_tol if tol is None else tol
    r0 = R0(model)
    report = VaccinationReport(model_name=model.name, r0=r0)

    for record in catalog.records:
        value = record.re_phi if record.re_phi is not None else Re(model, model.incidence(record.state))
        if record.is_dfe:
            expected, ok = "= R0", abs(value - r0) <= tol
        elif record.is_maximal:
            expected, ok = "= 1", abs(value - 1.0) <= tol
        else:
            expected, ok = "> 1", value > 1.0 + 1e-8
        if record.is_dfe and record.is_maximal and r0 > 1.0 + tol:
            expected, ok = "= 1", False
        eigen = check_equilibrium_eigenpair(model, record.state, tol)
        if not eigen.passed:
            logger.warning(
                f"Equilibrium {record.antichain_name}: gamma g is not a unit eigenvector of L_g "
                f"(residual {eigen.eigen_residual:.3e}, rho on support {eigen.rho_on_support:.10f})"
            )
        report.entries.append(VaccinationEntry(
            antichain=record.antichain_name,
            re_phi=value,
            is_maximal=record.is_maximal,
            is_dfe=record.is_dfe,
            expected=expected,
            ok=ok and eigen.passed,
            eigen=eigen,
        ))

    if not report.passed:
        logger.warning(f"Critical vaccination identity fails for {len(report.violations)} equilibria")
    return report


@dataclass
class MonatomicityReport:
    """Equilibrium counts of (T, lam * gamma, phi) over a grid of lam."""
    model_name: str
    counts: dict[float, int]
    structural: bool

    @property
    def at_most_one(self) -> bool:
        return all(c <= 1 for c in self.counts.values())

    @property
    def some_endemic(self) -> bool:
        return any(c >= 1 for c in self.counts.values())

    @property
    def by_counts(self) -> bool:
        return self.at_most_one and self.some_endemic

    @property
    def agrees(self) -> bool:
        return self.by_counts == self.structural

    @property
    def non_increasing(self) -> bool:
        ordered = [self.counts[lam] for lam in sorted(self.counts)]
        return all(a >= b for a, b in zip(ordered, ordered[1:]))

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "counts": {str(k): v for k, v in sorted(self.counts.items())},
            "by_counts": self.by_counts,
            "structural": self.structural,
            "agrees": self.agrees,
            "non_increasing": self.non_increasing,
        }


def monatomicity_by_equilibrium_counts(
    model: SISModel,
    decomposition: AtomDecomposition,
    lambdas: Sequence[float],
) -> MonatomicityReport:
    """
    Count non-null equilibria of the model with gamma scaled by each lambda.

    Each scaled model gets a full equilibrium catalog; the count is the
    number of its computed records that are not the disease-free state.
    """
    counts: dict[float, int] = {}
    floor = get_settings().dynamics.support_tol
    for lam in lambdas:
        if lam <= 0.0:
            raise PreconditionError(f"scaling factors must be positive, got {lam}")
        scaled = model.scale_gamma(lam)
        catalog = equilibrium_catalog(scaled, decompose(scaled))
        counts[float(lam)] = sum(1 for record in catalog.records if record.state.max(initial=0.0) > floor)
    report = MonatomicityReport(model_name=model.name, counts=counts, structural=is_monatomic(decomposition))
    if not report.agrees:
        logger.warning(f"Monatomicity by counts ({report.by_counts}) disagrees with structure ({report.structural})")
    return report


@dataclass
class EscapeReport:
    """Flow started slightly above a non-maximal equilibrium."""
    start_antichain: str
    lam: float
    epsilon: float
    direction_support: list[str]
    supersolution: bool
    reached_support: list[str]
    reached_distance: float
    strictly_larger: bool

    def to_dict(self) -> dict:
        return {
            "start_antichain": self.start_antichain,
            "lambda": self.lam,
            "epsilon": self.epsilon,
            "direction_support": self.direction_support,
            "supersolution": self.supersolution,
            "reached_support": self.reached_support,
            "reached_distance": self.reached_distance,
            "strictly_larger": self.strictly_larger,
        }


def escape_from_equilibrium(
    model: SISModel,
    catalog: EquilibriumCatalog,
    record: EquilibriumRecord,
    delta: float = 0.5,
) -> EscapeReport:
    """
    Perturb a non-maximal equilibrium h along the unstable direction w of
    T - gamma on the complement of supp h and follow the flow.

    The step eps is chosen with phi(eps ||w||) >= 1 - delta and
    delta (lam + max gamma) <= lam, so that F(h + eps w) >= 0.

    Raises:
        PreconditionError: record is maximal, or the complement is not supercritical
    """
    if record.is_maximal:
        raise PreconditionError("the maximal equilibrium has no escape direction")

    outside = ~record.support
    complement = project_model(model, outside)
    if R0(complement) <= 1.0:
        raise PreconditionError(f"complement {mask_labels(model.space, outside)} of the support is not supercritical")
    pair = supersolution_eigenpair(complement)
    w = np.where(outside, pair.w, 0.0)

    delta = min(delta, pair.lam / (pair.lam + float(model.gamma.max())))
    eps = 1.0
    while eps > 1e-12 and model.incidence(eps * float(w.max())) < 1.0 - delta:
        eps *= 0.5
    start = np.clip(record.state + eps * w, 0.0, 1.0)
    supersolution = bool(np.all(vector_field(model, start) >= -1e-12))

    trajectory = integrate(model, start)
    final = trajectory.final_state
    support_tol = get_settings().dynamics.support_tol
    reached = catalog.find_by_support(final > support_tol)
    distance = float(np.max(np.abs(reached.state - final))) if reached else float("inf")
    strictly_larger = bool(np.all(final >= record.state - 1e-9) and np.any(final > record.state + support_tol))

    logger.info(f"Escape from {record.antichain_name}: reached support {mask_labels(model.space, final > support_tol)}")
    return EscapeReport(
        start_antichain=record.antichain_name,
        lam=pair.lam,
        epsilon=eps,
        direction_support=mask_labels(model.space, w > 0.0),
        supersolution=supersolution,
        reached_support=mask_labels(model.space, final > support_tol),
        reached_distance=distance,
        strictly_larger=strictly_larger,
    )
