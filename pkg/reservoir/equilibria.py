"""
Equilibria and limits of the reservoir model, computed on the augmented
model and restricted back to the base features.

Only supercritical atoms disjoint from F(supp kappa) can be switched on or
off; everything in F(supp kappa) is always infected.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

from config.settings import get_settings
from core.errors import ConsistencyError, PreconditionError
from core.model import SISModel, mask_bits, support, validate_assumptions
from dynamics.equilibrium import EquilibriumRecord, maximal_equilibrium, predict_limit
from equilibria.catalog import EquilibriumCatalog
from reservoir.model import ReservoirModel, augment, augmented_state, reservoir_vector_field
from spectral.reproduction import Re
from structure.atoms import Antichain, AtomDecomposition, decompose, enumerate_antichains
from structure.graph import future

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ReservoirStructure:
    """Augmented model with its decomposition and the switchable atoms."""
    rm: ReservoirModel

    @cached_property
    def model(self) -> SISModel:
        return augment(self.rm)

    @cached_property
    def decomposition(self) -> AtomDecomposition:
        return decompose(self.model)

    @property
    def reservoir_atom(self) -> int:
        return int(self.decomposition.atom_of[self.rm.n])

    @cached_property
    def forced(self) -> np.ndarray:
        """F(supp kappa) on the base features."""
        source = np.append(self.rm.kappa_support, False)
        return future(self.decomposition.graph, source)[: self.rm.n]

    @cached_property
    def switchable(self) -> list[int]:
        """Supercritical base atoms disjoint from F(supp kappa)."""
        dec = self.decomposition
        return [
            i for i in dec.supercritical
            if i != self.reservoir_atom and not np.any(self.forced[dec.atoms[i].members])
        ]

    def maximal_among(self, candidates: Iterable[int]) -> Antichain:
        candidates = list(candidates)
        dec = self.decomposition
        return Antichain(tuple(
            i for i in candidates
            if not any(j != i and dec.precedes(i, j) for j in candidates)
        ))

    def base_future(self, mask: np.ndarray) -> np.ndarray:
        return future(self.decomposition.graph, np.append(mask, False))[: self.rm.n]

    def with_reservoir(self, antichain: Antichain) -> Antichain:
        return Antichain(antichain.members + (self.reservoir_atom,))


def _restrict(
    structure: ReservoirStructure,
    record: EquilibriumRecord,
    antichain: Antichain,
    is_maximal: bool,
) -> EquilibriumRecord:
    rm = structure.rm
    level = float(record.state[rm.n])
    level_tol = get_settings().reservoir.level_tol
    if abs(level - rm.a) > level_tol:
        raise ConsistencyError(f"reservoir level {level:.12g} differs from a = {rm.a} by more than {level_tol:g}")
    g = record.state[: rm.n].copy()
    residual = float(np.max(np.abs(reservoir_vector_field(rm, g))))
    return EquilibriumRecord(
        state=g,
        support=record.support[: rm.n].copy(),
        antichain=antichain,
        residual=max(residual, record.residual),
        is_maximal=is_maximal,
        labels=rm.base.labels,
        integration_time=record.integration_time,
        polish_iterations=record.polish_iterations,
        re_phi=Re(rm.base, rm.base.incidence(g)),
        antichain_name=record.antichain_name,
    )


def reservoir_equilibria(rm: ReservoirModel, workers: Optional[int] = None) -> EquilibriumCatalog:
    """
    One equilibrium per antichain of switchable atoms.

    The equilibrium of C is the maximal equilibrium of the augmented model on
    F(C) together with the future of the reservoir; its support on the base
    features is F(C) | F(supp kappa).

    Raises:
        PreconditionError: The base model violates the standing assumptions
        ConsistencyError: Reservoir level or support of a result is off
    """
    validation = validate_assumptions(rm.base)
    if not validation.passed:
        raise PreconditionError(
            f"reservoir catalog needs a valid base model: {'; '.join(validation.violations)}"
        )
    workers = get_settings().run.workers if workers is None else workers
    support_tol = get_settings().dynamics.support_tol

    structure = ReservoirStructure(rm)
    dec = structure.decomposition
    antichains = enumerate_antichains(dec, structure.switchable)
    top = structure.maximal_among(structure.switchable)
    logger.info(
        f"Computing {len(antichains)} reservoir equilibria of '{rm.name}' "
        f"({len(structure.switchable)} switchable atoms, forced support {mask_bits(structure.forced)})"
    )

    def compute(antichain: Antichain) -> EquilibriumRecord:
        full = structure.with_reservoir(antichain)
        target = dec.future_of(full)
        record = maximal_equilibrium(structure.model, target, dec)
        if record.antichain != full:
            raise ConsistencyError(
                f"augmented equilibrium on {mask_bits(target)} has antichain {record.antichain_name}, "
                f"expected {dec.antichain_name(full)}"
            )
        restricted = _restrict(structure, record, antichain, is_maximal=antichain == top)
        expected = dec.future_of(antichain)[: rm.n] | structure.forced
        observed = support(restricted.state, support_tol)
        if not np.array_equal(observed, expected):
            raise ConsistencyError(
                f"reservoir equilibrium for {record.antichain_name} has support {mask_bits(observed)}, "
                f"expected {mask_bits(expected)}"
            )
        return replace(restricted, support=expected)

    if workers > 1 and len(antichains) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(compute, antichains))
    else:
        records = [compute(c) for c in antichains]

    if len({r.support_bits for r in records}) != len(records):
        raise ConsistencyError("two reservoir equilibria share a support")

    return EquilibriumCatalog(
        model_name=rm.name,
        labels=rm.base.labels,
        records=records,
        near_critical=[dec.atoms[i].name for i in dec.near_critical],
    )


def reservoir_predict_limit(
    rm: ReservoirModel,
    h: Iterable[float],
    support_tol: Optional[float] = None,
) -> EquilibriumRecord:
    """
    Limit of the reservoir dynamics from h, restricted to the base features.

    Raises:
        ConsistencyError: Predicted antichain differs from the maximal
            switchable atoms inside F(supp h)
    """
    support_tol = get_settings().dynamics.support_tol if support_tol is None else support_tol
    structure = ReservoirStructure(rm)
    dec = structure.decomposition
    start = augmented_state(rm, h)
    record = predict_limit(structure.model, dec, start, support_tol)

    reach = structure.base_future(support(start[: rm.n], support_tol))
    inside = [i for i in structure.switchable if reach[dec.atoms[i].members].all()]
    expected = structure.maximal_among(inside)
    observed = Antichain(tuple(i for i in record.antichain if i != structure.reservoir_atom))
    if structure.reservoir_atom not in record.antichain or observed != expected:
        raise ConsistencyError(
            f"reservoir limit antichain {record.antichain_name} does not match "
            f"{dec.antichain_name(structure.with_reservoir(expected))}"
        )

    top = structure.maximal_among(structure.switchable)
    return _restrict(structure, record, observed, is_maximal=observed == top)
