"""
Transmission graph of a model.

Edge y -> x exists iff kernel[x, y] * weights[y] > edge_tol. The future
F(A) of a set is everything reachable from it, A included.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from config.settings import get_settings
from core.model import SISModel, SubsetMask

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TransmissionGraph:
    """Directed graph on features; adjacency[y, x] is the edge y -> x."""
    adjacency: np.ndarray
    labels: tuple[str, ...]

    @property
    def n(self) -> int:
        return int(self.adjacency.shape[0])

    @cached_property
    def csr(self) -> csr_matrix:
        return csr_matrix(self.adjacency.astype(np.int8))

    def edges(self) -> list[tuple[int, int]]:
        """Edges (y, x) in row-major order, self-loops included."""
        ys, xs = np.nonzero(self.adjacency)
        return list(zip(ys.tolist(), xs.tolist()))

    def edge_labels(self) -> list[str]:
        return [f"{self.labels[y]}->{self.labels[x]}" for y, x in self.edges()]

    def has_self_loop(self, x: int) -> bool:
        return bool(self.adjacency[x, x])


def transmission_graph(model: SISModel, edge_tol: Optional[float] = None) -> TransmissionGraph:
    """Build the transmission graph of a model."""
    edge_tol = get_settings().structure.edge_tol if edge_tol is None else edge_tol
    adjacency = model.matrix.T > edge_tol
    adjacency.setflags(write=False)
    graph = TransmissionGraph(adjacency=adjacency, labels=model.labels)
    logger.debug(f"Transmission graph of '{model.name}': {int(adjacency.sum())} edges")
    return graph


GraphLike = Union[SISModel, TransmissionGraph]


def _as_graph(source: GraphLike) -> TransmissionGraph:
    return transmission_graph(source) if isinstance(source, SISModel) else source


def future(source: GraphLike, A: SubsetMask) -> SubsetMask:
    """
    Reachability closure of A.

    Args:
        source: Model or its transmission graph
        A: Subset mask

    Returns:
        Mask of F(A)
    """
    graph = _as_graph(source)
    mask = np.asarray(A, dtype=bool)
    reached = np.zeros(graph.n, dtype=bool)
    for s in np.flatnonzero(mask):
        if reached[s]:
            continue
        order = breadth_first_order(graph.csr, int(s), directed=True, return_predecessors=False)
        reached[order] = True
    return reached


def is_invariant(source: GraphLike, A: SubsetMask) -> bool:
    """True iff no edge leaves A."""
    graph = _as_graph(source)
    mask = np.asarray(A, dtype=bool)
    return not bool(graph.adjacency[np.ix_(mask, ~mask)].any())
