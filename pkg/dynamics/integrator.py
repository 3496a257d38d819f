"""
Adaptive Dormand-Prince 5(4) integration of u' = F(u) on the unit cube.

After every accepted step the state is clamped back to [0, 1]; the size of
the largest clamp is tracked and clamps above clamp_warn are logged.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np
import pandas as pd

from config.constants import TerminalReason
from config.settings import get_settings
from core.errors import InputError
from core.model import SISModel, as_state, vector_field
from monitoring.resources import get_monitor

logger = logging.getLogger(__name__)

# Right-hand side f(y) of an autonomous system
RHS = Callable[[np.ndarray], np.ndarray]
# Hook called after each accepted step with (t, y, residual)
StepHook = Callable[[float, np.ndarray, float], None]

_EPS = np.finfo(float).eps


@dataclass
class Trajectory:
    """Sampled solution of an integration."""
    times: np.ndarray
    states: np.ndarray
    residuals: np.ndarray
    terminal_reason: TerminalReason
    labels: tuple[str, ...] = ()
    accepted_steps: int = 0
    rejected_steps: int = 0
    evaluations: int = 0
    max_clamp: float = 0.0

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_residual(self) -> float:
        return float(self.residuals[-1])

    @property
    def converged(self) -> bool:
        return self.terminal_reason is TerminalReason.RESIDUAL_CONVERGED

    def state_at(self, t: float) -> np.ndarray:
        """State at a sampled time, linear interpolation in between."""
        idx = int(np.searchsorted(self.times, t))
        if idx < len(self.times) and self.times[idx] == t:
            return self.states[idx]
        if t < self.times[0] or t > self.times[-1]:
            raise InputError(f"t = {t} is outside the trajectory [{self.times[0]}, {self.times[-1]}]")
        t0, t1 = self.times[idx - 1], self.times[idx]
        w = (t - t0) / (t1 - t0)
        return (1.0 - w) * self.states[idx - 1] + w * self.states[idx]

    def to_dataframe(self, stride: int = 1, by_label: bool = False) -> pd.DataFrame:
        """
        Columns t, feature_0 .. feature_{n-1}, residual; the last sample is always kept.

        by_label names the feature columns after the model labels instead.
        """
        keep = np.arange(0, len(self.times), max(1, stride))
        if keep[-1] != len(self.times) - 1:
            keep = np.append(keep, len(self.times) - 1)
        columns = tuple(f"feature_{i}" for i in range(self.states.shape[1]))
        if by_label and self.labels:
            columns = self.labels
        df = pd.DataFrame(self.states[keep], columns=list(columns))
        df.insert(0, "t", self.times[keep])
        df["residual"] = self.residuals[keep]
        return df

    def to_dict(self) -> dict:
        return {
            "final_time": self.final_time,
            "final_state": self.final_state.tolist(),
            "final_residual": self.final_residual,
            "terminal_reason": self.terminal_reason.value,
            "samples": len(self.times),
            "accepted_steps": self.accepted_steps,
            "rejected_steps": self.rejected_steps,
            "evaluations": self.evaluations,
            "max_clamp": self.max_clamp,
        }


class DormandPrince:
    """
    Dormand-Prince 5(4) embedded pair with first-same-as-last stages.

    The 5th order solution is propagated; the difference to the embedded
    4th order solution drives the step size.
    """

    C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
    A = (
        (),
        (1 / 5,),
        (3 / 40, 9 / 40),
        (44 / 45, -56 / 15, 32 / 9),
        (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
        (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
        (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
    )
    B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
    B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
    E = B5 - B4

    SAFETY = 0.9
    MIN_FACTOR = 0.2
    MAX_FACTOR = 5.0

    def __init__(
        self,
        rtol: Optional[float] = None,
        atol: Optional[float] = None,
        initial_step: Optional[float] = None,
        max_steps: Optional[int] = None,
        clamp_warn: Optional[float] = None,
    ):
        config = get_settings().dynamics
        self.rtol = config.rtol if rtol is None else rtol
        self.atol = config.atol if atol is None else atol
        self.initial_step = config.initial_step if initial_step is None else initial_step
        self.max_steps = config.max_steps if max_steps is None else max_steps
        self.clamp_warn = config.clamp_warn if clamp_warn is None else clamp_warn

    def _step(self, f: RHS, y: np.ndarray, k0: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray, float]:
        """One trial step; returns (y_new, stage matrix, error norm)."""
        K = np.empty((7, y.size))
        K[0] = k0
        for i in range(1, 7):
            K[i] = f(y + h * np.dot(self.A[i], K[:i]))
        y_new = y + h * np.dot(self.A[6], K[:6])
        err = h * (self.E @ K)
        scale = self.atol + self.rtol * np.maximum(np.abs(y), np.abs(y_new))
        return y_new, K, float(np.sqrt(np.mean((err / scale) ** 2)))

    def solve(
        self,
        f: RHS,
        y0: np.ndarray,
        t_max: float,
        residual_tol: float = 0.0,
        checkpoints: Optional[Iterable[float]] = None,
        on_step: Optional[StepHook] = None,
        labels: tuple[str, ...] = (),
    ) -> Trajectory:
        """
        Integrate y' = f(y) from t = 0.

        Args:
            f: Right-hand side
            y0: Initial state in [0, 1]^m
            t_max: Final time
            residual_tol: Stop once ||f(y)||_inf <= residual_tol (disabled when <= 0)
            checkpoints: Times in (0, t_max] that are hit exactly and always sampled
            on_step: Called after every accepted step
            labels: Column labels of the trajectory

        Returns:
            Trajectory of accepted steps
        """
        if t_max <= 0.0:
            raise InputError(f"t_max must be positive, got {t_max}")
        marks = sorted({float(c) for c in (() if checkpoints is None else np.ravel(checkpoints)) if 0.0 < c <= t_max})

        y = np.clip(np.array(y0, dtype=float), 0.0, 1.0)
        k0 = f(y)
        evaluations = 1
        residual = float(np.max(np.abs(k0))) if k0.size else 0.0
        times, states, residuals = [0.0], [y.copy()], [residual]

        t = 0.0
        h = min(self.initial_step, t_max)
        accepted = rejected = 0
        max_clamp = 0.0
        clamp_warned = False
        mark_idx = 0
        reason = TerminalReason.T_MAX_REACHED

        if 0.0 < residual_tol and residual <= residual_tol and not marks:
            reason = TerminalReason.RESIDUAL_CONVERGED
            t = t_max

        while t < t_max:
            if accepted + rejected >= self.max_steps:
                logger.warning(f"Step budget of {self.max_steps} exhausted at t = {t:.6g}")
                reason = TerminalReason.STEP_FAILURE
                break

            target = marks[mark_idx] if mark_idx < len(marks) else t_max
            landing = t + h >= target
            step = target - t if landing else h
            if step <= 16.0 * _EPS * max(1.0, abs(t)):
                logger.warning(f"Step size underflow at t = {t:.6g} (h = {step:.3e})")
                reason = TerminalReason.STEP_FAILURE
                break

            y_new, K, err = self._step(f, y, k0, step)
            evaluations += 6
            if not np.isfinite(err):
                rejected += 1
                h = step * self.MIN_FACTOR
                continue
            if err > 1.0:
                rejected += 1
                h = step * max(self.MIN_FACTOR, self.SAFETY * err ** -0.2)
                continue

            accepted += 1
            t = target if landing else t + step
            clipped = np.clip(y_new, 0.0, 1.0)
            clamp = float(np.max(np.abs(clipped - y_new))) if y_new.size else 0.0
            if clamp > 0.0:
                max_clamp = max(max_clamp, clamp)
                k0 = f(clipped)
                evaluations += 1
                if clamp > self.clamp_warn and not clamp_warned:
                    logger.warning(f"Clamp of {clamp:.3e} back into [0, 1] at t = {t:.6g}; step size may be too large")
                    clamp_warned = True
            else:
                k0 = K[6]
            y = clipped
            residual = float(np.max(np.abs(k0)))

            times.append(t)
            states.append(y.copy())
            residuals.append(residual)
            if on_step is not None:
                on_step(t, y, residual)

            if landing and mark_idx < len(marks):
                mark_idx += 1

            factor = self.MAX_FACTOR if err == 0.0 else min(self.MAX_FACTOR, max(self.MIN_FACTOR, self.SAFETY * err ** -0.2))
            if not landing or step >= h:
                h = step * factor

            if 0.0 < residual_tol and residual <= residual_tol and mark_idx >= len(marks):
                reason = TerminalReason.RESIDUAL_CONVERGED
                break

        get_monitor().record_integration(accepted, rejected, evaluations)
        logger.debug(
            f"Integration stopped at t = {t:.6g} ({reason.value}): {accepted} accepted, "
            f"{rejected} rejected, residual {residual:.3e}"
        )
        return Trajectory(
            times=np.array(times),
            states=np.array(states),
            residuals=np.array(residuals),
            terminal_reason=reason,
            labels=labels,
            accepted_steps=accepted,
            rejected_steps=rejected,
            evaluations=evaluations,
            max_clamp=max_clamp,
        )


def integrate(
    model: SISModel,
    h: Iterable[float],
    t_max: Optional[float] = None,
    residual_tol: Optional[float] = None,
    checkpoints: Optional[Iterable[float]] = None,
    on_step: Optional[StepHook] = None,
    solver: Optional[DormandPrince] = None,
) -> Trajectory:
    """
    Integrate the SIS semi-flow from h.

    Args:
        model: SIS model
        h: Initial state in [0, 1]^n
        t_max: Final time, defaults to settings
        residual_tol: Early stop on ||F(u)||_inf, defaults to the equilibrium
            tolerance; pass 0 to integrate up to t_max
        checkpoints: Times to land on exactly
        on_step: Hook after each accepted step
        solver: Integrator instance, a default DormandPrince otherwise

    Returns:
        Trajectory
    """
    config = get_settings().dynamics
    t_max = config.t_max if t_max is None else t_max
    residual_tol = config.equilibrium_tol if residual_tol is None else residual_tol
    u0 = as_state(model, h)
    solver = solver or DormandPrince()
    return solver.solve(
        lambda u: vector_field(model, u),
        u0,
        t_max,
        residual_tol=residual_tol,
        checkpoints=checkpoints,
        on_step=on_step,
        labels=model.labels,
    )
