"""
Atomic decomposition of the transmission operator.

Atoms are the strongly connected components of the transmission graph,
numbered by their smallest feature index. A singleton without self-loop is
a zero atom. A precedes B (A <= B) iff A is contained in the future of B.
"""
import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from config.constants import AtomClass
from config.settings import get_settings
from core.errors import ResourceCapError
from core.model import SISModel, SubsetMask, empty_mask
from spectral.reproduction import R0
from structure.graph import TransmissionGraph, future, transmission_graph

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Atom:
    """One strongly connected component."""
    index: int
    members: np.ndarray
    mask: np.ndarray
    future: np.ndarray
    r0: float
    atom_class: AtomClass
    labels: tuple[str, ...]

    @property
    def is_zero(self) -> bool:
        return self.atom_class is AtomClass.ZERO

    @property
    def is_supercritical(self) -> bool:
        return self.atom_class is AtomClass.SUPERCRITICAL

    @property
    def name(self) -> str:
        return "{" + ",".join(self.labels) + "}"

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "members": list(self.labels),
            "class": self.atom_class.value,
            "r0": self.r0,
        }


@dataclass(frozen=True)
class Antichain:
    """Sorted tuple of pairwise incomparable atom indices."""
    members: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(int(m) for m in self.members)))

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def is_empty(self) -> bool:
        return not self.members

    def sort_key(self) -> tuple[int, tuple[int, ...]]:
        return (len(self.members), self.members)


@dataclass(frozen=True, eq=False)
class AtomDecomposition:
    """
    Atoms of a model with their classes, futures and order.

    order[i, j] is True iff atom i precedes atom j.
    """
    model_name: str
    labels: tuple[str, ...]
    graph: TransmissionGraph
    atoms: tuple[Atom, ...]
    atom_of: np.ndarray
    order: np.ndarray
    r0_total: float
    classification_tol: float
    near_critical: tuple[int, ...] = field(default=())

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def nonzero(self) -> list[int]:
        return [a.index for a in self.atoms if not a.is_zero]

    @property
    def supercritical(self) -> list[int]:
        return [a.index for a in self.atoms if a.is_supercritical]

    def precedes(self, i: int, j: int) -> bool:
        return bool(self.order[i, j])

    def comparable(self, i: int, j: int) -> bool:
        return bool(self.order[i, j] or self.order[j, i])

    def is_admissible(self, A: SubsetMask) -> bool:
        """True iff A is a union of atoms."""
        mask = np.asarray(A, dtype=bool)
        return all(mask[a.members].all() or not mask[a.members].any() for a in self.atoms)

    def atoms_in(self, A: SubsetMask) -> list[int]:
        """Atoms entirely contained in A."""
        mask = np.asarray(A, dtype=bool)
        return [a.index for a in self.atoms if mask[a.members].all()]

    def future_of(self, indices: Iterable[int]) -> SubsetMask:
        out = empty_mask(self.n)
        for i in indices:
            out |= self.atoms[i].future
        return out

    def antichain_name(self, antichain: Antichain) -> str:
        if antichain.is_empty:
            return "{}"
        return " ".join(self.atoms[i].name for i in antichain)

    def hasse_edges(self) -> list[tuple[int, int]]:
        """Cover relations (i, j): i strictly precedes j with nothing in between."""
        k = len(self.atoms)
        strict = self.order & ~np.eye(k, dtype=bool)
        edges = []
        for i in range(k):
            for j in range(k):
                if strict[i, j] and not np.any(strict[i, :] & strict[:, j]):
                    edges.append((i, j))
        return edges

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "atoms": [a.to_dict() for a in self.atoms],
            "hasse": [[self.atoms[i].name, self.atoms[j].name] for i, j in self.hasse_edges()],
            "futures": {a.name: [self.labels[x] for x in np.flatnonzero(a.future)] for a in self.atoms},
            "supercritical": [self.atoms[i].name for i in self.supercritical],
            "near_critical": [self.atoms[i].name for i in self.near_critical],
            "r0": self.r0_total,
            "monatomic": is_monatomic(self),
        }

    def format_report(self) -> str:
        lines = [
            "=" * 60,
            f"ATOMIC DECOMPOSITION: {self.model_name}",
            "=" * 60,
            f"Features: {self.n}   Atoms: {len(self.atoms)}   Non-zero: {len(self.nonzero)}   "
            f"Supercritical: {len(self.supercritical)}",
            f"R0(all features): {self.r0_total:.10f}",
            f"Monatomic: {str(is_monatomic(self)).lower()}",
            "",
            "Atoms:",
        ]
        for a in self.atoms:
            future_labels = ",".join(self.labels[x] for x in np.flatnonzero(a.future))
            lines.append(f"  [{a.index}] {a.name:<20} {a.atom_class.value:<14} R0 = {a.r0:.10f}   "
                         f"F = {{{future_labels}}}")
        edges = self.hasse_edges()
        lines.append("")
        lines.append("Order (Hasse cover relations, lower < upper):")
        if not edges:
            lines.append("  (none)")
        for i, j in edges:
            lines.append(f"  {self.atoms[i].name} < {self.atoms[j].name}")
        if self.near_critical:
            lines.append("")
            lines.append(f"WARNING: near-critical atoms (|R0 - 1| <= {self.classification_tol:g}): "
                         + ", ".join(self.atoms[i].name for i in self.near_critical))
        lines.append("=" * 60)
        return "\n".join(lines)


def _classify(r0: float, tol: float) -> AtomClass:
    if abs(r0 - 1.0) <= tol:
        return AtomClass.CRITICAL
    return AtomClass.SUPERCRITICAL if r0 > 1.0 else AtomClass.SUBCRITICAL


def decompose(model: SISModel, tol: Optional[float] = None) -> AtomDecomposition:
    """
    Decompose a model into atoms.

    Args:
        model: SIS model
        tol: Spectral tolerance for atom reproduction numbers

    Returns:
        AtomDecomposition
    """
    ctol = get_settings().structure.classification_tol
    graph = transmission_graph(model)
    n_comp, comp = connected_components(graph.csr, directed=True, connection="strong")

    # Number atoms by their smallest feature
    first = [int(np.flatnonzero(comp == c)[0]) for c in range(n_comp)]
    ordering = sorted(range(n_comp), key=lambda c: first[c])
    atom_of = np.empty(model.n, dtype=int)

    atoms = []
    for index, c in enumerate(ordering):
        members = np.flatnonzero(comp == c)
        mask = np.zeros(model.n, dtype=bool)
        mask[members] = True
        atom_of[members] = index
        if members.size == 1 and not graph.has_self_loop(int(members[0])):
            r0, atom_class = 0.0, AtomClass.ZERO
        else:
            r0 = R0(model, mask, tol)
            atom_class = _classify(r0, ctol)
        members.setflags(write=False)
        atoms.append(Atom(
            index=index,
            members=members,
            mask=mask,
            future=future(graph, mask),
            r0=r0,
            atom_class=atom_class,
            labels=tuple(model.labels[i] for i in members),
        ))

    k = len(atoms)
    order = np.zeros((k, k), dtype=bool)
    for i in range(k):
        for j in range(k):
            order[i, j] = bool(atoms[j].future[atoms[i].members].all())

    near_critical = tuple(a.index for a in atoms if a.atom_class is AtomClass.CRITICAL)
    for i in near_critical:
        logger.warning(f"Atom {atoms[i].name} of '{model.name}' is near-critical (R0 = {atoms[i].r0:.12g})")

    decomposition = AtomDecomposition(
        model_name=model.name,
        labels=model.labels,
        graph=graph,
        atoms=tuple(atoms),
        atom_of=atom_of,
        order=order,
        r0_total=R0(model, tol=tol),
        classification_tol=ctol,
        near_critical=near_critical,
    )
    logger.info(
        f"Decomposed '{model.name}': {k} atoms, {len(decomposition.nonzero)} non-zero, "
        f"{len(decomposition.supercritical)} supercritical"
    )
    return decomposition


def supercritical_antichains(
    decomposition: AtomDecomposition,
    cap: Optional[int] = None,
) -> list[Antichain]:
    """
    All antichains of supercritical atoms, the empty one included.

    Returns:
        Antichains sorted by size, then by members

    Raises:
        ResourceCapError: More supercritical atoms than the cap
    """
    return enumerate_antichains(decomposition, decomposition.supercritical, cap)


def enumerate_antichains(
    decomposition: AtomDecomposition,
    candidates: Sequence[int],
    cap: Optional[int] = None,
) -> list[Antichain]:
    """All antichains drawn from the given atom indices, the empty one included."""
    cap = get_settings().structure.antichain_cap if cap is None else cap
    sup = sorted(candidates)
    if len(sup) > cap:
        raise ResourceCapError(
            f"{len(sup)} atoms exceed the antichain enumeration cap of {cap}; "
            f"raise it with SIS_ANTICHAIN_CAP if 2^{len(sup)} subsets are affordable"
        )

    found: list[Antichain] = []

    def extend(start: int, current: list[int]) -> None:
        found.append(Antichain(tuple(current)))
        for k in range(start, len(sup)):
            candidate = sup[k]
            if all(not decomposition.comparable(candidate, m) for m in current):
                current.append(candidate)
                extend(k + 1, current)
                current.pop()

    extend(0, [])
    found.sort(key=Antichain.sort_key)
    logger.debug(f"{len(found)} antichains over {len(sup)} candidate atoms")
    return found


def maximal_supercritical_antichain(decomposition: AtomDecomposition, A: SubsetMask) -> Antichain:
    """Maximal elements of the supercritical atoms contained in A."""
    inside = [i for i in decomposition.atoms_in(A) if decomposition.atoms[i].is_supercritical]
    maximal = [
        i for i in inside
        if not any(j != i and decomposition.precedes(i, j) for j in inside)
    ]
    return Antichain(tuple(maximal))


def future_of_antichain(decomposition: AtomDecomposition, antichain: Antichain) -> SubsetMask:
    return decomposition.future_of(antichain)


def is_monatomic(decomposition: AtomDecomposition) -> bool:
    """Exactly one non-zero atom."""
    return len(decomposition.nonzero) == 1
