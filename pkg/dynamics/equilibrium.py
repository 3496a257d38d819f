"""
Maximal equilibria and long-time limits of the semi-flow.

The maximal equilibrium of a set A is the limit of the projected semi-flow
started from 1_A. Only the future of the maximal supercritical antichain of
A carries a positive equilibrium, so the descent is run on that set and the
disease-free state is returned exactly when the antichain is empty.
"""
import logging
from dataclasses import dataclass, replace
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import root

from config.settings import get_settings
from core.errors import ConvergenceError, MonotonicityError
from core.model import (
    SISModel,
    SubsetMask,
    as_mask,
    as_state,
    full_mask,
    indicator,
    mask_bits,
    mask_labels,
    project_model,
    support,
    vector_field,
)
from dynamics.integrator import integrate
from structure.atoms import (
    Antichain,
    AtomDecomposition,
    decompose,
    maximal_supercritical_antichain,
)
from structure.graph import future, is_invariant

logger = logging.getLogger(__name__)


@dataclass
class EquilibriumRecord:
    """An equilibrium g with F(g) = 0 and its structural data."""
    state: np.ndarray
    support: np.ndarray
    antichain: Antichain
    residual: float
    is_maximal: bool = False
    labels: tuple[str, ...] = ()
    integration_time: float = 0.0
    polish_iterations: int = 0
    re_phi: Optional[float] = None
    antichain_name: str = ""

    @property
    def is_dfe(self) -> bool:
        return not self.support.any()

    @property
    def support_labels(self) -> list[str]:
        return [self.labels[i] for i in np.flatnonzero(self.support)]

    @property
    def support_bits(self) -> str:
        return mask_bits(self.support)

    def to_dict(self) -> dict:
        return {
            "antichain": list(self.antichain.members),
            "antichain_name": self.antichain_name,
            "support": self.support_labels,
            "support_bits": self.support_bits,
            "state": self.state.tolist(),
            "residual": self.residual,
            "is_maximal": self.is_maximal,
            "re_phi": self.re_phi,
        }


def _dfe(model: SISModel, antichain: Antichain) -> EquilibriumRecord:
    return EquilibriumRecord(
        state=np.zeros(model.n),
        support=np.zeros(model.n, dtype=bool),
        antichain=antichain,
        residual=0.0,
        is_maximal=True,
        labels=model.labels,
    )


class _MonotoneGuard:
    """Aborts when a state started at an indicator increases."""

    def __init__(self, start: np.ndarray, slack: float, labels: tuple[str, ...]):
        self.previous = start.copy()
        self.slack = slack
        self.labels = labels

    def __call__(self, t: float, y: np.ndarray, residual: float) -> None:
        increase = y - self.previous
        worst = int(np.argmax(increase))
        if increase[worst] > self.slack:
            raise MonotonicityError(
                f"semi-flow from the top state increased by {increase[worst]:.3e} at feature "
                f"{self.labels[worst]}, t = {t:.6g}",
                time=t,
                index=worst,
            )
        self.previous = y.copy()


def _polish(
    model: SISModel,
    g: np.ndarray,
    S: SubsetMask,
    tol: float,
    max_iter: int,
    damping: float,
) -> tuple[np.ndarray, float, int]:
    """Damped fixed-point refinement g <- clamp(phi(g) T g / gamma) on S."""
    best = g.copy()
    best_residual = float(np.max(np.abs(vector_field(model, g))))
    current = g.copy()
    for iteration in range(1, max_iter + 1):
        if best_residual <= tol:
            return best, best_residual, iteration - 1
        image = np.clip(model.incidence(current) * (model.matrix @ current) / model.gamma, 0.0, 1.0)
        current = np.where(S, (1.0 - damping) * current + damping * image, 0.0)
        residual = float(np.max(np.abs(vector_field(model, current))))
        if residual < best_residual:
            best, best_residual = current.copy(), residual
    return best, best_residual, max_iter


def _root_finish(model: SISModel, g: np.ndarray, S: SubsetMask) -> Optional[np.ndarray]:
    """
    Hybrid root solve of F(g) = 0 on the coordinates of S, seeded with g.

    The maximal equilibrium is the only equilibrium positive on all of S, so
    a root that stays positive there is accepted; anything else is dropped.
    """
    idx = np.flatnonzero(S)

    def residual_on_S(x: np.ndarray) -> np.ndarray:
        u = np.zeros(model.n)
        u[idx] = x
        return vector_field(model, u)[idx]

    solution = root(residual_on_S, g[idx], method="hybr", options={"xtol": 1e-15})
    x = solution.x
    if not np.all(np.isfinite(x)) or x.min() <= 0.0 or x.max() > 1.0 + 1e-12:
        logger.debug(f"Root finish rejected: {solution.message}")
        return None
    out = np.zeros(model.n)
    out[idx] = np.minimum(x, 1.0)
    return out


def maximal_equilibrium(
    model: SISModel,
    A: Optional[SubsetMask] = None,
    decomposition: Optional[AtomDecomposition] = None,
    t_max: Optional[float] = None,
    tol: Optional[float] = None,
) -> EquilibriumRecord:
    """
    Maximal equilibrium g*_A of the model projected on A.

    Args:
        model: SIS model
        A: Subset mask, all features when None
        decomposition: Decomposition of model; used when A is an invariant
            union of atoms so that the antichain uses its atom indices
        t_max: Integration horizon
        tol: Residual tolerance on ||F_A(g)||_inf

    Returns:
        EquilibriumRecord with is_maximal set

    Raises:
        MonotonicityError: The descent from 1 increased somewhere
        ConvergenceError: Residual tolerance not reached
    """
    config = get_settings().dynamics
    tol = config.equilibrium_tol if tol is None else tol
    mask = full_mask(model.n) if A is None else as_mask(model, A)
    projected = project_model(model, mask)

    if decomposition is not None and decomposition.is_admissible(mask) and is_invariant(decomposition.graph, mask):
        dec = decomposition
    else:
        dec = decompose(projected)
    antichain = maximal_supercritical_antichain(dec, mask)
    name = dec.antichain_name(antichain)

    if antichain.is_empty:
        logger.debug("No supercritical atom in the set; maximal equilibrium is the DFE")
        return replace(_dfe(model, antichain), antichain_name=name)

    S = dec.future_of(antichain) & mask
    on_S = project_model(model, S)
    start = indicator(S)
    guard = _MonotoneGuard(start, config.monotone_slack, model.labels)
    trajectory = integrate(on_S, start, t_max=t_max, residual_tol=tol, on_step=guard)

    g = np.where(S, trajectory.final_state, 0.0)
    g, residual, iterations = _polish(on_S, g, S, tol, config.polish_max_iter, config.polish_damping)
    if residual > tol:
        refined = _root_finish(on_S, g, S)
        if refined is not None:
            refined_residual = float(np.max(np.abs(vector_field(on_S, refined))))
            if refined_residual < residual:
                logger.debug(f"Root finish lowered the residual from {residual:.3e} to {refined_residual:.3e}")
                g, residual = refined, refined_residual
    if residual > tol:
        raise ConvergenceError(
            f"maximal equilibrium on {mask_labels(model.space, S)} stalled at residual {residual:.3e} "
            f"(t = {trajectory.final_time:.6g}, {trajectory.terminal_reason.value})",
            best_estimate=g,
            residual=residual,
        )

    logger.debug(
        f"Maximal equilibrium for antichain {name}: residual {residual:.3e} "
        f"after t = {trajectory.final_time:.6g} and {iterations} polish iterations"
    )
    return EquilibriumRecord(
        state=g,
        support=S.copy(),
        antichain=antichain,
        residual=residual,
        is_maximal=True,
        labels=model.labels,
        integration_time=trajectory.final_time,
        polish_iterations=iterations,
        antichain_name=name,
    )


def predict_limit(
    model: SISModel,
    decomposition: AtomDecomposition,
    h: Iterable[float],
    support_tol: Optional[float] = None,
) -> EquilibriumRecord:
    """
    Limit of the semi-flow from h: the maximal equilibrium of F(supp h).

    Args:
        model: SIS model
        decomposition: Decomposition of model
        h: Initial state
        support_tol: Entries above this count as infected

    Returns:
        EquilibriumRecord; is_maximal tells whether it is g* of the whole model
    """
    config = get_settings().dynamics
    support_tol = config.support_tol if support_tol is None else support_tol
    h = as_state(model, h)
    reach = future(decomposition.graph, support(h, support_tol))
    record = maximal_equilibrium(model, reach, decomposition)
    top = maximal_supercritical_antichain(decomposition, full_mask(model.n))
    predicted = replace(record, is_maximal=record.antichain == top)
    logger.info(
        f"Predicted limit from support {mask_labels(model.space, support(h, support_tol))}: "
        f"antichain {predicted.antichain_name}, support {predicted.support_labels}"
    )
    return predicted


def closed_form_continuum_flow(x: Iterable[float], t: float) -> np.ndarray:
    """
    Semi-flow from 1 of the continuum example T f = f(1) 1, gamma(x) = x / 2,
    phi = 1 - id, with unit mass at x = 1.

    Returns:
        phi(t, 1)(x) for each x in (0, 1]
    """
    x = np.asarray(x, dtype=float)
    at_one = 1.0 / (2.0 - np.exp(-t / 2.0))
    return (2.0 + (x - 1.0) * np.exp(-(x + 1.0) * t / 2.0)) / (x + 1.0) * at_one


def continuum_equilibrium(x: Iterable[float]) -> np.ndarray:
    """g*(x) = 1 / (1 + x) for the continuum example."""
    return 1.0 / (1.0 + np.asarray(x, dtype=float))


@dataclass
class SupportObservation:
    """Observed support of phi(t, h) against F(supp h)."""
    time: float
    observed: np.ndarray
    expected: np.ndarray

    @property
    def matches(self) -> bool:
        return bool(np.array_equal(self.observed, self.expected))

    def to_dict(self) -> dict:
        return {
            "time": self.time,
            "observed": mask_bits(self.observed),
            "expected": mask_bits(self.expected),
            "matches": self.matches,
        }


def support_of_flow(
    model: SISModel,
    h: Iterable[float],
    t: Optional[float] = None,
    support_tol: Optional[float] = None,
) -> SupportObservation:
    """Support of the flow at time t (default: the burn-in time) versus F(supp h)."""
    config = get_settings().dynamics
    t = config.support_burn_in if t is None else t
    support_tol = config.support_tol if support_tol is None else support_tol
    h = as_state(model, h)
    trajectory = integrate(model, h, t_max=t, residual_tol=0.0, checkpoints=[t])
    return SupportObservation(
        time=t,
        observed=support(trajectory.state_at(t), support_tol),
        expected=future(model, support(h, support_tol)),
    )
