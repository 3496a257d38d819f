"""
Graph structure of the transmission operator: futures, atoms and antichains.
"""
from structure.graph import TransmissionGraph, transmission_graph, future, is_invariant
from structure.atoms import (
    Atom,
    Antichain,
    AtomDecomposition,
    decompose,
    supercritical_antichains,
    enumerate_antichains,
    maximal_supercritical_antichain,
    future_of_antichain,
    is_monatomic,
)

__all__ = [
    "TransmissionGraph",
    "transmission_graph",
    "future",
    "is_invariant",
    "Atom",
    "Antichain",
    "AtomDecomposition",
    "decompose",
    "supercritical_antichains",
    "enumerate_antichains",
    "maximal_supercritical_antichain",
    "future_of_antichain",
    "is_monatomic",
]
