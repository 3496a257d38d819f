"""
SIS model data types and the vector field.

The transmission operator acts as
    (T f)(x) = sum_y kernel[x, y] * f[y] * weights[y]
and every component of the package goes through apply_T or the cached
matrix of T, never through a private copy of that formula.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from core.errors import DimensionError, InputError
from incidence.base import ConformityReport, IncidenceFunction
from incidence.conformity import check_conformity

logger = logging.getLogger(__name__)

# Boolean vector of length n
SubsetMask = np.ndarray
# Real vector of length n with entries in [0, 1]
StateVector = np.ndarray


def _frozen_array(values: Iterable[float], name: str, ndim: int) -> np.ndarray:
    try:
        arr = np.array(values, dtype=float)
    except (TypeError, ValueError) as e:
        raise InputError(f"{name} must be numeric: {e}")
    if arr.ndim != ndim:
        raise DimensionError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FeatureSpace:
    """Finite feature set with positive population weights."""
    weights: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        weights = _frozen_array(self.weights, "weights", 1)
        if weights.size == 0:
            raise InputError("feature space must have at least one feature")
        if np.any(weights <= 0.0):
            raise InputError("weights must be strictly positive; delete zero-weight features")
        labels = tuple(str(l) for l in self.labels) if self.labels else tuple(
            f"feature_{i}" for i in range(weights.size)
        )
        if len(labels) != weights.size:
            raise DimensionError(f"{len(labels)} labels for {weights.size} weights")
        if len(set(labels)) != len(labels):
            raise InputError("feature labels must be unique")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return int(self.weights.size)

    @classmethod
    def uniform(cls, n: int, labels: Optional[Sequence[str]] = None) -> "FeatureSpace":
        """Feature space with unit weights."""
        return cls(weights=np.ones(n), labels=tuple(labels or ()))

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"Unknown feature label '{label}'; known labels: {list(self.labels)}")


@dataclass(frozen=True, eq=False)
class SISModel:
    """
    The triple (T, gamma, phi) on a weighted feature space.

    Construction checks shapes and finiteness only; sign conditions are
    reported by validate_assumptions.
    """
    space: FeatureSpace
    kernel: np.ndarray
    gamma: np.ndarray
    incidence: IncidenceFunction
    name: str = "model"

    def __post_init__(self):
        kernel = _frozen_array(self.kernel, "kernel", 2)
        gamma = _frozen_array(self.gamma, "gamma", 1)
        n = self.space.n
        if kernel.shape != (n, n):
            raise DimensionError(f"kernel must be {n}x{n}, got {kernel.shape}")
        if gamma.size != n:
            raise DimensionError(f"gamma must have length {n}, got {gamma.size}")
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "gamma", gamma)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def weights(self) -> np.ndarray:
        return self.space.weights

    @property
    def labels(self) -> tuple[str, ...]:
        return self.space.labels

    @cached_property
    def matrix(self) -> np.ndarray:
        """Matrix of T: kernel[x, y] * weights[y]."""
        m = self.kernel * self.weights[np.newaxis, :]
        m.setflags(write=False)
        return m

    @cached_property
    def next_generation(self) -> np.ndarray:
        """Matrix of T M_{1/gamma}: kernel[x, y] * weights[y] / gamma[y]."""
        m = self.matrix / self.gamma[np.newaxis, :]
        m.setflags(write=False)
        return m

    def replace(self, **changes) -> "SISModel":
        """Copy with some fields replaced."""
        values = {
            "space": self.space,
            "kernel": self.kernel,
            "gamma": self.gamma,
            "incidence": self.incidence,
            "name": self.name,
        }
        values.update(changes)
        return SISModel(**values)

    def scale_gamma(self, factor: float) -> "SISModel":
        """Model (T, factor * gamma, phi)."""
        return self.replace(gamma=self.gamma * float(factor), name=f"{self.name}[gamma*{factor:g}]")


# ==================== Vectors and masks ====================

def as_vector(model: SISModel, values: Iterable[float], name: str = "vector") -> np.ndarray:
    """Convert to a float vector of length n."""
    arr = np.asarray(values, dtype=float)
    if arr.shape != (model.n,):
        raise DimensionError(f"{name} must have length {model.n}, got shape {arr.shape}")
    return arr


def as_state(model: SISModel, values: Iterable[float], tol: float = 0.0) -> StateVector:
    """Convert to a state vector, checking entries lie in [0, 1]."""
    u = as_vector(model, values, "state")
    if not np.all(np.isfinite(u)):
        raise InputError("state must be finite")
    if np.any(u < -tol) or np.any(u > 1.0 + tol):
        raise InputError(f"state entries must lie in [0, 1], got range [{u.min():.6g}, {u.max():.6g}]")
    return np.clip(u, 0.0, 1.0)


def as_mask(model: SISModel, members: Iterable[bool]) -> SubsetMask:
    mask = np.asarray(members, dtype=bool)
    if mask.shape != (model.n,):
        raise DimensionError(f"mask must have length {model.n}, got shape {mask.shape}")
    return mask


def full_mask(n: int) -> SubsetMask:
    return np.ones(n, dtype=bool)


def empty_mask(n: int) -> SubsetMask:
    return np.zeros(n, dtype=bool)


def mask_from_indices(n: int, indices: Iterable[int]) -> SubsetMask:
    mask = np.zeros(n, dtype=bool)
    mask[list(indices)] = True
    return mask


def mask_from_labels(space: FeatureSpace, labels: Iterable[str]) -> SubsetMask:
    """Mask of the named features; unknown labels raise InputError."""
    return mask_from_indices(space.n, [space.index_of(label) for label in labels])


def mask_labels(space: FeatureSpace, mask: SubsetMask) -> list[str]:
    return [space.labels[i] for i in np.flatnonzero(mask)]


def mask_bits(mask: SubsetMask) -> str:
    """Bitmask string, feature 0 first."""
    return "".join("1" if m else "0" for m in mask)


def indicator(mask: SubsetMask) -> StateVector:
    return np.asarray(mask, dtype=float)


def ones_state(model: SISModel) -> StateVector:
    return np.ones(model.n)


def zeros_state(model: SISModel) -> StateVector:
    return np.zeros(model.n)


def support(u: np.ndarray, tol: float = 0.0) -> SubsetMask:
    """Features where u exceeds tol."""
    return np.asarray(u) > tol


# ==================== Operator and vector field ====================

def apply_T(model: SISModel, f: Iterable[float]) -> np.ndarray:
    """
    Apply the transmission operator.

    Args:
        model: SIS model
        f: Real vector of length n

    Returns:
        (T f)(x) = sum_y kernel[x, y] f[y] weights[y]
    """
    return model.matrix @ as_vector(model, f, "f")


def vector_field(model: SISModel, u: Iterable[float]) -> np.ndarray:
    """F(u) = phi(u) * T u - gamma * u, entrywise products."""
    u = as_vector(model, u, "state")
    return model.incidence(u) * (model.matrix @ u) - model.gamma * u


def project_model(model: SISModel, A: SubsetMask) -> SISModel:
    """
    Model with T_A = M_A T M_A; gamma, weights and phi are unchanged.
    """
    mask = as_mask(model, A)
    kernel = np.where(np.outer(mask, mask), model.kernel, 0.0)
    return model.replace(kernel=kernel)


# ==================== Assumption checks ====================

AUTO_SATISFIED = "auto-satisfied (finite dimension)"


@dataclass
class ValidationReport:
    """Outcome of validate_assumptions."""
    model_name: str
    n: int
    violations: list[str] = field(default_factory=list)
    notes: dict[str, str] = field(default_factory=dict)
    conformity: Optional[ConformityReport] = None

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "n": self.n,
            "passed": self.passed,
            "violations": list(self.violations),
            "notes": dict(self.notes),
            "conformity": self.conformity.to_dict() if self.conformity else None,
        }

    def format_report(self) -> str:
        lines = [f"Model '{self.model_name}' ({self.n} features): "
                 f"{'valid' if self.passed else f'{len(self.violations)} violation(s)'}"]
        lines.extend(f"  violation: {v}" for v in self.violations)
        lines.extend(f"  {k}: {v}" for k, v in self.notes.items())
        if self.conformity is not None:
            lines.append("  " + self.conformity.format_report().replace("\n", "\n  "))
        return "\n".join(lines)


def validate_assumptions(model: SISModel, grid_size: Optional[int] = None) -> ValidationReport:
    """
    Check the standing assumptions on (T, gamma, phi).

    Violations are collected in the report; nothing is raised.
    """
    report = ValidationReport(model_name=model.name, n=model.n)

    if np.any(model.weights <= 0.0):
        report.violations.append("weights must be strictly positive")
    if np.any(model.gamma <= 0.0):
        bad = [model.labels[i] for i in np.flatnonzero(model.gamma <= 0.0)]
        report.violations.append(f"gamma must be strictly positive (features {bad})")
    if np.any(model.kernel < 0.0):
        count = int(np.sum(model.kernel < 0.0))
        report.violations.append(f"kernel must be nonnegative ({count} negative entries)")

    report.conformity = check_conformity(model.incidence, grid_size)
    if not report.conformity.passed:
        report.violations.extend(f"incidence: {v}" for v in report.conformity.violations)

    report.notes["T bounded on L-infinity"] = AUTO_SATISFIED
    report.notes["T/gamma bounded from L^p to L-infinity"] = AUTO_SATISFIED

    if report.violations:
        logger.warning(f"Model '{model.name}' has {len(report.violations)} assumption violation(s)")
    else:
        logger.debug(f"Model '{model.name}' satisfies the standing assumptions")
    return report
