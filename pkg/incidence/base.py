"""
Base incidence interface and result types.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Optional, Union

import numpy as np

from config.constants import IncidenceFamily
from core.errors import InputError

ArrayLike = Union[float, np.ndarray]


@dataclass
class ConformityReport:
    """Result of a grid conformity check of an incidence function."""
    passed: bool
    family: str
    grid_size: int
    phi_at_zero: float
    phi_at_one: float
    lipschitz_estimate: float
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "family": self.family,
            "grid_size": self.grid_size,
            "phi_at_zero": self.phi_at_zero,
            "phi_at_one": self.phi_at_one,
            "lipschitz_estimate": self.lipschitz_estimate,
            "violations": list(self.violations),
            "warnings": list(self.warnings),
        }

    def format_report(self) -> str:
        lines = [
            f"Incidence {self.family}: {'conforming' if self.passed else 'NON-CONFORMING'}",
            f"  phi(0) = {self.phi_at_zero:.12g}, phi(1) = {self.phi_at_one:.12g}",
            f"  Lipschitz estimate: {self.lipschitz_estimate:.6g} (grid {self.grid_size})",
        ]
        lines.extend(f"  violation: {v}" for v in self.violations)
        lines.extend(f"  warning: {w}" for w in self.warnings)
        return "\n".join(lines)


class IncidenceFunction(ABC):
    """
    Abstract base class for incidence functions phi.

    Instances are immutable and evaluate entrywise on scalars or arrays.
    Evaluation outside [0, 1] is allowed and uses a locally Lipschitz
    extension of the formula.
    """

    @property
    @abstractmethod
    def family(self) -> IncidenceFamily:
        """Family of the function."""
        pass

    @property
    def params(self) -> dict[str, Any]:
        """Parameters as they appear in the model file."""
        return {}

    @abstractmethod
    def _evaluate(self, u: np.ndarray) -> np.ndarray:
        """Evaluate on a float array."""
        pass

    def __call__(self, u: ArrayLike) -> ArrayLike:
        arr = np.asarray(u, dtype=float)
        out = self._evaluate(np.atleast_1d(arr))
        if arr.ndim == 0:
            return float(out[0])
        return out.reshape(arr.shape)

    @property
    def name(self) -> str:
        """Display name with parameters."""
        if not self.params:
            return self.family.value
        args = ", ".join(f"{k}={v}" for k, v in self.params.items() if not callable(v))
        return f"{self.family.value}({args})"

    def to_config(self) -> dict:
        """Serialize as {family, params} for the model file."""
        return {"family": self.family.value, "params": dict(self.params)}

    def __repr__(self) -> str:
        return f"{type(self).__name__}<{self.name}>"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IncidenceFunction):
            return NotImplemented
        return type(self) is type(other) and self.params == other.params

    def __hash__(self) -> int:
        return hash((type(self).__name__, repr(sorted(self.params.items(), key=lambda kv: kv[0]))))


def require_finite(name: str, value: Optional[float]) -> float:
    """Validate a real construction parameter."""
    try:
        number = float(value)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        number = np.nan
    if isinstance(value, (str, bool)) or not np.isfinite(number):
        raise InputError(f"Incidence parameter '{name}' must be a finite real, got {value!r}")
    return number
