"""
Numerical verification of limit predictions and of flow monotonicity.

Nothing here raises on a failed check; findings go into the reports.
"""
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from config.constants import SpectralSign
from config.settings import get_settings
from core.errors import InputError
from core.model import SISModel, as_state, ones_state, vector_field
from dynamics.equilibrium import EquilibriumRecord
from dynamics.integrator import DormandPrince, integrate
from spectral.reproduction import spectral_bound_sign

logger = logging.getLogger(__name__)


@dataclass
class VerificationReport:
    """Observed limit of the flow from h against the predicted equilibrium."""
    predicted_support: list[str]
    initial_distance: float
    sup_distance: float
    gamma_distance: float
    match_tol: float
    final_time: float
    final_residual: float
    terminal_reason: str
    decay_rate: Optional[float] = None
    decay_bound: Optional[float] = None
    decay_matches: Optional[bool] = None

    @property
    def matched(self) -> bool:
        return self.sup_distance <= self.match_tol and self.gamma_distance <= self.match_tol

    @property
    def passed(self) -> bool:
        return self.matched and self.decay_matches is not False

    def to_dict(self) -> dict:
        return {
            "predicted_support": self.predicted_support,
            "initial_distance": self.initial_distance,
            "sup_distance": self.sup_distance,
            "gamma_distance": self.gamma_distance,
            "match_tol": self.match_tol,
            "matched": self.matched,
            "final_time": self.final_time,
            "final_residual": self.final_residual,
            "terminal_reason": self.terminal_reason,
            "decay_rate": self.decay_rate,
            "decay_bound": self.decay_bound,
            "decay_matches": self.decay_matches,
        }

    def format_report(self) -> str:
        lines = [
            f"Predicted support: {{{','.join(self.predicted_support)}}}",
            f"Observed at t = {self.final_time:.6g} ({self.terminal_reason}), residual {self.final_residual:.3e}",
            f"Distance to prediction: sup {self.sup_distance:.3e}, gamma-weighted {self.gamma_distance:.3e} "
            f"-> {'MATCH' if self.matched else 'MISMATCH'} (tol {self.match_tol:g})",
        ]
        if self.decay_rate is not None:
            lines.append(
                f"Exponential decay rate {self.decay_rate:.6g} vs -s(T - gamma) = {self.decay_bound:.6g} "
                f"-> {'consistent' if self.decay_matches else 'INCONSISTENT'}"
            )
        return "\n".join(lines)


def fit_decay_rate(times: np.ndarray, norms: np.ndarray, start: float, floor: float) -> Optional[float]:
    """Slope of -log ||u(t)|| over t >= start where the norm exceeds floor."""
    keep = (times >= start) & (norms > floor)
    if np.count_nonzero(keep) < 3:
        return None
    slope, _ = np.polyfit(times[keep], np.log(norms[keep]), 1)
    return float(-slope)


def verify_limit(
    model: SISModel,
    h: Iterable[float],
    predicted: EquilibriumRecord,
    t_max: Optional[float] = None,
    match_tol: Optional[float] = None,
) -> VerificationReport:
    """
    Integrate from h and compare the terminal state with a prediction.

    For models with s(T - gamma) < 0 the exponential decay rate of
    ||u(t)||_inf is fitted and compared with -s(T - gamma).
    """
    config = get_settings().dynamics
    match_tol = config.match_tol if match_tol is None else match_tol
    h = as_state(model, h)
    trajectory = integrate(model, h, t_max=t_max)
    final = trajectory.final_state

    report = VerificationReport(
        predicted_support=predicted.support_labels,
        initial_distance=float(np.max(np.abs(h - predicted.state))),
        sup_distance=float(np.max(np.abs(final - predicted.state))),
        gamma_distance=float(np.max(np.abs((final - predicted.state) * model.gamma))),
        match_tol=match_tol,
        final_time=trajectory.final_time,
        final_residual=trajectory.final_residual,
        terminal_reason=trajectory.terminal_reason.value,
    )

    bound = spectral_bound_sign(model)
    if bound.sign is SpectralSign.NEGATIVE and h.any():
        norms = np.max(trajectory.states, axis=1)
        rate = fit_decay_rate(trajectory.times, norms, config.decay_fit_start, config.decay_fit_floor)
        if rate is not None:
            report.decay_rate = rate
            report.decay_bound = -bound.value
            report.decay_matches = abs(rate + bound.value) <= config.decay_rel_tol * abs(bound.value)

    log = logger.info if report.passed else logger.warning
    log(f"Limit verification: sup distance {report.sup_distance:.3e}, "
        f"gamma distance {report.gamma_distance:.3e}, matched={report.matched}")
    return report


@dataclass
class MonotoneFlowReport:
    """Order preservation along accepted steps."""
    passed: bool
    steps_checked: int
    max_violation: float
    violation_time: Optional[float] = None
    violation_label: Optional[str] = None
    slack: float = 0.0
    details: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "steps_checked": self.steps_checked,
            "max_violation": self.max_violation,
            "violation_time": self.violation_time,
            "violation_label": self.violation_label,
            "slack": self.slack,
        }


class _OrderTracker:
    """Records the worst violation of lower <= upper along a run."""

    def __init__(self, labels: tuple[str, ...]):
        self.labels = labels
        self.steps = 0
        self.worst = 0.0
        self.time: Optional[float] = None
        self.index: Optional[int] = None

    def observe(self, t: float, gap: np.ndarray) -> None:
        self.steps += 1
        i = int(np.argmax(gap))
        if gap[i] > self.worst:
            self.worst, self.time, self.index = float(gap[i]), t, i

    def report(self, slack: float) -> MonotoneFlowReport:
        return MonotoneFlowReport(
            passed=self.worst <= slack,
            steps_checked=self.steps,
            max_violation=self.worst,
            violation_time=self.time,
            violation_label=None if self.index is None else self.labels[self.index],
            slack=slack,
        )


def check_monotone_flow(
    model: SISModel,
    h1: Iterable[float],
    h2: Iterable[float],
    horizon: Optional[float] = None,
) -> MonotoneFlowReport:
    """
    Co-integrate from h1 <= h2 and check phi(t, h1) <= phi(t, h2) at every accepted step.

    Raises:
        InputError: h1 <= h2 does not hold
    """
    config = get_settings().dynamics
    horizon = config.monotone_horizon if horizon is None else horizon
    lower, upper = as_state(model, h1), as_state(model, h2)
    if np.any(lower > upper):
        raise InputError("check_monotone_flow needs h1 <= h2 entrywise")

    n = model.n
    tracker = _OrderTracker(model.labels)

    def stacked(y: np.ndarray) -> np.ndarray:
        return np.concatenate([vector_field(model, y[:n]), vector_field(model, y[n:])])

    def on_step(t: float, y: np.ndarray, residual: float) -> None:
        tracker.observe(t, y[:n] - y[n:])

    DormandPrince().solve(stacked, np.concatenate([lower, upper]), horizon, residual_tol=0.0, on_step=on_step)
    report = tracker.report(config.monotone_slack)
    if not report.passed:
        logger.warning(f"Order violated by {report.max_violation:.3e} at t = {report.violation_time:.6g}")
    return report


def check_descent_from_top(model: SISModel, horizon: Optional[float] = None) -> MonotoneFlowReport:
    """Check that the flow from 1 is entrywise non-increasing in time."""
    config = get_settings().dynamics
    horizon = config.monotone_horizon if horizon is None else horizon
    tracker = _OrderTracker(model.labels)
    previous = [ones_state(model)]

    def on_step(t: float, y: np.ndarray, residual: float) -> None:
        tracker.observe(t, y - previous[0])
        previous[0] = y.copy()

    integrate(model, ones_state(model), t_max=horizon, residual_tol=0.0, on_step=on_step)
    return tracker.report(config.monotone_slack)
