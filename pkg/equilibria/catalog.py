"""
Equilibrium catalog: one equilibrium per supercritical antichain.

The equilibrium of an antichain C is the maximal equilibrium of F(C); its
support is F(C) and the maximal supercritical antichain of that support is C
again. Records are keyed by support.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import pandas as pd

from config.settings import get_settings
from core.errors import ConsistencyError
from core.model import SISModel, mask_bits, support
from dynamics.equilibrium import EquilibriumRecord, maximal_equilibrium
from spectral.reproduction import Re
from structure.atoms import (
    Antichain,
    AtomDecomposition,
    maximal_supercritical_antichain,
    supercritical_antichains,
)

logger = logging.getLogger(__name__)


def equilibrium_for_antichain(
    model: SISModel,
    decomposition: AtomDecomposition,
    antichain: Antichain,
) -> EquilibriumRecord:
    """
    Equilibrium whose support is the future of a supercritical antichain.

    Raises:
        ConsistencyError: Support or antichain of the result do not match
    """
    config = get_settings().dynamics
    target = decomposition.future_of(antichain)
    record = maximal_equilibrium(model, target, decomposition)

    observed = support(record.state, config.support_tol)
    if not np.array_equal(observed, target):
        raise ConsistencyError(
            f"equilibrium for {decomposition.antichain_name(antichain)} has support {mask_bits(observed)}, "
            f"expected {mask_bits(target)}"
        )
    recovered = maximal_supercritical_antichain(decomposition, observed)
    if recovered != antichain:
        raise ConsistencyError(
            f"support of the equilibrium for {decomposition.antichain_name(antichain)} yields antichain "
            f"{decomposition.antichain_name(recovered)}"
        )
    return replace(record, antichain=antichain, antichain_name=decomposition.antichain_name(antichain),
                   is_maximal=False)


@dataclass
class EquilibriumCatalog:
    """All equilibria of a model, sorted by antichain."""
    model_name: str
    labels: tuple[str, ...]
    records: list[EquilibriumRecord]
    near_critical: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def maximal(self) -> EquilibriumRecord:
        return next(r for r in self.records if r.is_maximal)

    @property
    def nonnull(self) -> list[EquilibriumRecord]:
        return [r for r in self.records if not r.is_dfe]

    def find_by_support(self, mask: np.ndarray) -> Optional[EquilibriumRecord]:
        """Record with exactly this support, if any."""
        for record in self.records:
            if np.array_equal(record.support, mask):
                return record
        return None

    def match(self, state: np.ndarray, support_tol: float, match_tol: float) -> Optional[EquilibriumRecord]:
        """Match a state by support first, then by values."""
        record = self.find_by_support(support(state, support_tol))
        if record is not None and np.max(np.abs(record.state - state)) <= match_tol:
            return record
        return None

    def to_dataframe(self) -> pd.DataFrame:
        rows = []
        for record in self.records:
            row = {
                "antichain": record.antichain_name,
                "support": record.support_bits,
            }
            row.update({label: value for label, value in zip(self.labels, record.state)})
            row["residual"] = record.residual
            row["re_phi"] = record.re_phi
            rows.append(row)
        return pd.DataFrame(rows, columns=["antichain", "support", *self.labels, "residual", "re_phi"])

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "count": len(self.records),
            "equilibria": [r.to_dict() for r in self.records],
            "near_critical": list(self.near_critical),
        }

    def format_report(self) -> str:
        lines = [
            "=" * 60,
            f"EQUILIBRIUM CATALOG: {self.model_name} ({len(self.records)} equilibria)",
            "=" * 60,
        ]
        if self.near_critical:
            lines.append(f"WARNING: near-critical atoms {', '.join(self.near_critical)}; "
                         f"catalog is sensitive to perturbations")
        for k, record in enumerate(self.records):
            tag = " [g*]" if record.is_maximal else ""
            tag += " [DFE]" if record.is_dfe else ""
            lines.append(f"#{k} antichain {record.antichain_name}{tag}")
            lines.append(f"   support: {{{','.join(record.support_labels)}}}")
            values = ", ".join(f"{label}={value:.10f}" for label, value in zip(self.labels, record.state))
            lines.append(f"   state: {values}")
            re_text = "n/a" if record.re_phi is None else f"{record.re_phi:.6f}"
            lines.append(f"   residual: {record.residual:.3e}   Re(phi(g)): {re_text}")
        lines.append("=" * 60)
        return "\n".join(lines)


def equilibrium_catalog(
    model: SISModel,
    decomposition: AtomDecomposition,
    workers: Optional[int] = None,
) -> EquilibriumCatalog:
    """
    Compute the equilibrium of every supercritical antichain.

    Args:
        model: SIS model
        decomposition: Decomposition of model
        workers: Thread count for the per-antichain computations

    Returns:
        EquilibriumCatalog with the record of the top antichain flagged maximal
    """
    workers = get_settings().run.workers if workers is None else workers
    antichains = supercritical_antichains(decomposition)
    logger.info(f"Computing {len(antichains)} equilibria of '{model.name}' with {workers} worker(s)")

    def compute(antichain: Antichain) -> EquilibriumRecord:
        record = equilibrium_for_antichain(model, decomposition, antichain)
        return replace(record, re_phi=Re(model, model.incidence(record.state)))

    if workers > 1 and len(antichains) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(compute, antichains))
    else:
        records = [compute(c) for c in antichains]

    top = maximal_supercritical_antichain(decomposition, np.ones(model.n, dtype=bool))
    records = [replace(r, is_maximal=r.antichain == top) for r in records]

    supports = {r.support_bits for r in records}
    if len(supports) != len(records):
        raise ConsistencyError("two catalog equilibria share a support")

    return EquilibriumCatalog(
        model_name=model.name,
        labels=model.labels,
        records=records,
        near_critical=[decomposition.atoms[i].name for i in decomposition.near_critical],
    )


@dataclass
class SupportOrderReport:
    """Entrywise order of the catalog against inclusion of supports."""
    pairs_checked: int
    agreements: int
    disagreements: list[tuple[str, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.disagreements

    def to_dict(self) -> dict:
        return {
            "pairs_checked": self.pairs_checked,
            "agreements": self.agreements,
            "disagreements": [list(p) for p in self.disagreements],
            "passed": self.passed,
        }


def order_by_supports(catalog: EquilibriumCatalog, match_tol: Optional[float] = None) -> SupportOrderReport:
    """Check g <= g' entrywise iff supp g is contained in supp g' for every ordered pair."""
    match_tol = get_settings().dynamics.match_tol if match_tol is None else match_tol
    report = SupportOrderReport(pairs_checked=0, agreements=0)
    for g in catalog.records:
        for other in catalog.records:
            if g is other:
                continue
            report.pairs_checked += 1
            below = bool(np.all(g.state <= other.state + match_tol))
            included = bool(np.all(other.support[g.support]))
            if below == included:
                report.agreements += 1
            else:
                report.disagreements.append((g.antichain_name, other.antichain_name))
    return report
