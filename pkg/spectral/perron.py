"""
Perron root of nonnegative matrices.

The matrix is split into strongly connected classes. Each class C is made
primitive by the shift M_C + delta I with delta = 1 + max diag(M_C), and its
Perron root is found by power iteration until the Collatz-Wielandt bounds
min (Bv / v) <= rho(B) <= max (Bv / v) are tol apart.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from config.settings import get_settings
from core.errors import ConvergenceError, InputError

logger = logging.getLogger(__name__)


@dataclass
class SpectralResult:
    """Spectral radius with optional Perron vector."""
    radius: float
    eigenvector: Optional[np.ndarray] = None
    iterations: int = 0
    residual: float = 0.0
    classes: int = 0

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "eigenvector": None if self.eigenvector is None else self.eigenvector.tolist(),
            "iterations": self.iterations,
            "residual": self.residual,
            "classes": self.classes,
        }


@dataclass
class _ClassRoot:
    members: np.ndarray
    radius: float
    vector: np.ndarray
    iterations: int
    gap: float


def _check_matrix(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"matrix must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix entries must be finite")
    if np.any(M < 0.0):
        raise InputError("matrix entries must be nonnegative")
    return M


def _class_root(block: np.ndarray, members: np.ndarray, tol: float, cap: int) -> _ClassRoot:
    """Perron root of one irreducible block."""
    if block.shape[0] == 1:
        return _ClassRoot(members, float(block[0, 0]), np.ones(1), 0, 0.0)

    delta = 1.0 + float(np.max(np.diag(block)))
    shifted = block + delta * np.eye(block.shape[0])
    v = np.ones(block.shape[0])
    lower, upper = 0.0, np.inf

    for iteration in range(1, cap + 1):
        w = shifted @ v
        ratios = w / v
        lower, upper = float(ratios.min()), float(ratios.max())
        v = w / w.max()
        if upper - lower <= tol:
            return _ClassRoot(members, 0.5 * (lower + upper) - delta, v, iteration, upper - lower)

    estimate = 0.5 * (lower + upper) - delta
    raise ConvergenceError(
        f"Power iteration did not converge in {cap} iterations on a class of size {block.shape[0]} "
        f"(Collatz-Wielandt gap {upper - lower:.3e})",
        best_estimate=estimate,
        residual=upper - lower,
    )


def _downstream(pattern: csr_matrix, sources: np.ndarray) -> np.ndarray:
    """Nodes reachable from sources along edges y -> x where M[x, y] > 0."""
    reached = np.zeros(pattern.shape[0], dtype=bool)
    for s in sources:
        if not reached[s]:
            order = breadth_first_order(pattern, int(s), directed=True, return_predecessors=False)
            reached[order] = True
    return reached


def _perron_vector(
    M: np.ndarray,
    pattern: csr_matrix,
    roots: list[_ClassRoot],
    radius: float,
    tol: float,
) -> Optional[np.ndarray]:
    """
    Nonnegative eigenvector for radius.

    Seeded on a dominant class with no other dominant class downstream, then
    extended to its future by solving (rho I - M_FF) v_F = M_FC v_C.
    """
    dominant = [r for r in roots if r.radius >= radius - 2.0 * tol]
    futures = [_downstream(pattern, r.members) for r in dominant]

    for root, fut in zip(dominant, futures):
        others = [o for o in dominant if o is not root]
        if any(fut[o.members].any() for o in others):
            continue

        v = np.zeros(M.shape[0])
        v[root.members] = root.vector
        rest = fut.copy()
        rest[root.members] = False
        if rest.any():
            F = np.flatnonzero(rest)
            system = radius * np.eye(F.size) - M[np.ix_(F, F)]
            rhs = M[np.ix_(F, root.members)] @ root.vector
            try:
                v[F] = np.linalg.solve(system, rhs)
            except np.linalg.LinAlgError:
                logger.debug("Singular downstream system while extending the Perron vector")
                return None
        if np.any(v < -tol):
            logger.debug("Perron vector extension produced negative entries")
            return None
        v = np.clip(v, 0.0, None)
        return v / v.max()
    return None


def spectral_radius(
    M: np.ndarray,
    tol: Optional[float] = None,
    want_vector: bool = False,
) -> SpectralResult:
    """
    Spectral radius of a nonnegative square matrix.

    Args:
        M: Nonnegative square matrix
        tol: Absolute accuracy on the radius, defaults to settings
        want_vector: Also return a nonnegative eigenvector (sup-norm 1)

    Returns:
        SpectralResult

    Raises:
        InputError: Non-square, non-finite or negative matrix
        ConvergenceError: Iteration cap exceeded on some class
    """
    config = get_settings().spectral
    tol = config.tol if tol is None else tol
    if tol <= 0.0:
        raise InputError(f"tol must be positive, got {tol}")
    M = _check_matrix(M)
    n = M.shape[0]
    if n == 0:
        return SpectralResult(radius=0.0)

    # Edge y -> x when M[x, y] > 0
    pattern = csr_matrix((M > 0.0).T.astype(np.int8))
    n_classes, labels = connected_components(pattern, directed=True, connection="strong")
    cap = config.iteration_cap(n)

    roots = [
        _class_root(M[np.ix_(members, members)], members, tol, cap)
        for members in (np.flatnonzero(labels == c) for c in range(n_classes))
    ]
    best = max(roots, key=lambda r: r.radius)
    radius = max(best.radius, 0.0)
    iterations = sum(r.iterations for r in roots)
    residual = max(r.gap for r in roots)

    eigenvector = None
    if want_vector:
        eigenvector = _perron_vector(M, pattern, roots, radius, tol)
        if eigenvector is not None:
            residual = float(np.max(np.abs(M @ eigenvector - radius * eigenvector)))

    logger.debug(f"rho = {radius:.12g} over {n_classes} classes ({iterations} iterations)")
    return SpectralResult(
        radius=radius,
        eigenvector=eigenvector,
        iterations=iterations,
        residual=residual,
        classes=n_classes,
    )
