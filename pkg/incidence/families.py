"""
Catalog of incidence functions.

All built-in families satisfy phi(0) = 1 and phi(1) = 0 by construction.
Removable singularities at u = 0 evaluate to their limit 1.
"""
from typing import Any, Callable, Optional, Sequence

import numpy as np

from config.constants import IncidenceFamily
from core.errors import InputError
from incidence.base import IncidenceFunction, require_finite

# Below this magnitude of c*u the removable singularity is evaluated by its limit.
_SMALL = 1e-300


def _signed_power(base: np.ndarray, exponent: float) -> np.ndarray:
    return np.sign(base) * np.abs(base) ** exponent


def _safe_ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    out = np.ones_like(denominator)
    nonzero = np.abs(denominator) > _SMALL
    out[nonzero] = numerator[nonzero] / denominator[nonzero]
    return out


class MassAction(IncidenceFunction):
    """phi(u) = 1 - u."""

    @property
    def family(self) -> IncidenceFamily:
        return IncidenceFamily.MASS_ACTION

    def _evaluate(self, u: np.ndarray) -> np.ndarray:
        return 1.0 - u


class LondonYorke(IncidenceFunction):
    """phi(u) = (1 - u)(1 - a u); conforming for a in (0, 1]."""

    def __init__(self, a: float):
        self.a = require_finite("a", a)

    @property
    def family(self) -> IncidenceFamily:
        return IncidenceFamily.LONDON_YORKE

    @property
    def params(self) -> dict[str, Any]:
        return {"a": self.a}

    def _evaluate(self, u: np.ndarray) -> np.ndarray:
        return (1.0 - u) * (1.0 - self.a * u)


class Power(IncidenceFunction):
    """phi(u) = (1 - u)^alpha; conforming for alpha >= 1."""

    def __init__(self, alpha: float):
        self.alpha = require_finite("alpha", alpha)

    @property
    def family(self) -> IncidenceFamily:
        return IncidenceFamily.POWER

    @property
    def params(self) -> dict[str, Any]:
        return {"alpha": self.alpha}

    def _evaluate(self, u: np.ndarray) -> np.ndarray:
        return _signed_power(1.0 - u, self.alpha)


class Saturation(IncidenceFunction):
    """phi(u) = (1 - u) / (1 + c u)."""

    def __init__(self, c: float):
        self.c = require_finite("c", c)

    @property
    def family(self) -> IncidenceFamily:
        return IncidenceFamily.SATURATION

    @property
    def params(self) -> dict[str, Any]:
        return {"c": self.c}

    def _evaluate(self, u: np.ndarray) -> np.ndarray:
        return (1.0 - u) / (1.0 + self.c * u)


class ExponentialSaturation(IncidenceFunction):
    """phi(u) = (1 - u)(1 - exp(-c u)) / (c u)."""

    def __init__(self, c: float):
        self.c = require_finite("c", c)
        if self.c == 0.0:
            raise InputError("exponential_saturation requires c != 0")

    @property
    def family(self) -> IncidenceFamily:
        return IncidenceFamily.EXPONENTIAL_SATURATION

    @property
    def params(self) -> dict[str, Any]:
        return {"c": self.c}

    def _evaluate(self, u: np.ndarray) -> np.ndarray:
        cu = self.c * u
        return (1.0 - u) * _safe_ratio(-np.expm1(-cu), cu)


class LogSaturation(IncidenceFunction):
    """phi(u) = (1 - u) log(1 + c u) / (c u)."""

    def __init__(self, c: float):
        self.c = require_finite("c", c)
        if self.c == 0.0:
            raise InputError("log_saturation requires c != 0")

    @property
    def family(self) -> IncidenceFamily:
        return IncidenceFamily.LOG_SATURATION

    @property
    def params(self) -> dict[str, Any]:
        return {"c": self.c}

    def _evaluate(self, u: np.ndarray) -> np.ndarray:
        cu = self.c * u
        return (1.0 - u) * _safe_ratio(np.log1p(cu), cu)


# Named shapes g of the saturation-type incidence g(I) S, each with g(0) = 0 and g'(0) = 1.
G_FORMS: dict[str, Callable[[np.ndarray, float], np.ndarray]] = {
    "saturating": lambda u, c: u / (1.0 + c * u),
    "exponential": lambda u, c: -np.expm1(-c * u) / c,
    "logarithmic": lambda u, c: np.log1p(c * u) / c,
    "psychological": lambda u, c: u / (1.0 + c * u * u),
}


class CapassoSerio(IncidenceFunction):
    """
    phi(u) = (1 - u) g(u) / u for an incidence g with g(0) = 0, g'(0) = 1.

    phi is decreasing on [0, 1] iff g(u) >= u (1 - u) g'(u) there, which does
    not hold for every admissible g; check_conformity detects the failure.

    Args:
        g: Callable on arrays, or the name of an entry of G_FORMS
        c: Shape parameter when g is a named form
    """

    def __init__(self, g: Any, c: Optional[float] = None):
        if isinstance(g, str):
            if g not in G_FORMS:
                raise InputError(f"Unknown capasso_serio form '{g}'; expected one of {sorted(G_FORMS)}")
            self.c = require_finite("c", c)
            if self.c == 0.0:
                raise InputError("capasso_serio named forms require c != 0")
            form = G_FORMS[g]
            self._g: Callable[[np.ndarray], np.ndarray] = lambda u: form(u, self.c)
            self.form: Optional[str] = g
        elif callable(g):
            self._g = g
            self.form = None
            self.c = None
        else:
            raise InputError(f"capasso_serio needs a callable or a form name, got {g!r}")

    @property
    def family(self) -> IncidenceFamily:
        return IncidenceFamily.CAPASSO_SERIO

    @property
    def params(self) -> dict[str, Any]:
        if self.form is None:
            return {"g": self._g}
        return {"g": self.form, "c": self.c}

    def _evaluate(self, u: np.ndarray) -> np.ndarray:
        return (1.0 - u) * _safe_ratio(np.asarray(self._g(u), dtype=float), u)

    def to_config(self) -> dict:
        if self.form is None:
            raise InputError("capasso_serio with a callable g cannot be written to a model file")
        return super().to_config()


class Custom(IncidenceFunction):
    """
    User supplied phi, either a callable or a table interpolated linearly.

    Args:
        func: Callable on arrays
        points: Increasing abscissae covering [0, 1] (tabulated form)
        values: phi at the abscissae
    """

    def __init__(
        self,
        func: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        points: Optional[Sequence[float]] = None,
        values: Optional[Sequence[float]] = None,
    ):
        if (func is None) == (points is None):
            raise InputError("custom incidence needs exactly one of func or points/values")
        self.func = func
        self.points: Optional[tuple[float, ...]] = None
        self.values: Optional[tuple[float, ...]] = None
        if points is not None:
            try:
                xs = np.asarray(points, dtype=float)
                ys = np.asarray(values if values is not None else [], dtype=float)
            except (TypeError, ValueError) as e:
                raise InputError(f"custom incidence table entries must be numbers: {e}")
            if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
                raise InputError("custom incidence table needs matching points/values of length >= 2")
            if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
                raise InputError("custom incidence table must be finite")
            if np.any(np.diff(xs) <= 0):
                raise InputError("custom incidence points must be strictly increasing")
            self.points = tuple(xs.tolist())
            self.values = tuple(ys.tolist())

    @property
    def family(self) -> IncidenceFamily:
        return IncidenceFamily.CUSTOM

    @property
    def params(self) -> dict[str, Any]:
        if self.func is not None:
            return {"func": self.func}
        return {"points": list(self.points or ()), "values": list(self.values or ())}

    def _evaluate(self, u: np.ndarray) -> np.ndarray:
        if self.func is not None:
            return np.asarray(self.func(u), dtype=float)
        return np.interp(u, self.points, self.values)

    def to_config(self) -> dict:
        if self.func is not None:
            raise InputError("custom incidence with a callable cannot be written to a model file")
        return super().to_config()


# Factory helpers

def mass_action() -> MassAction:
    return MassAction()


def london_yorke(a: float) -> LondonYorke:
    return LondonYorke(a)


def power(alpha: float) -> Power:
    return Power(alpha)


def saturation(c: float) -> Saturation:
    return Saturation(c)


def exponential_saturation(c: float) -> ExponentialSaturation:
    return ExponentialSaturation(c)


def log_saturation(c: float) -> LogSaturation:
    return LogSaturation(c)


def capasso_serio(g: Any, c: Optional[float] = None) -> CapassoSerio:
    return CapassoSerio(g, c)


def custom(
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    points: Optional[Sequence[float]] = None,
    values: Optional[Sequence[float]] = None,
) -> Custom:
    return Custom(func=func, points=points, values=values)


def evaluate(phi: IncidenceFunction, r: float) -> float:
    """Evaluate phi at a single point."""
    return float(phi(float(r)))


def from_config(config: dict) -> IncidenceFunction:
    """
    Build an incidence function from its model-file form.

    Args:
        config: {"family": name, "params": {...}}

    Returns:
        IncidenceFunction

    Raises:
        InputError: Unknown family or bad parameters
    """
    try:
        family = IncidenceFamily(config.get("family"))
    except ValueError:
        names = [f.value for f in IncidenceFamily]
        raise InputError(f"Unknown incidence family {config.get('family')!r}; expected one of {names}")

    params = dict(config.get("params") or {})
    try:
        if family is IncidenceFamily.MASS_ACTION:
            return MassAction()
        if family is IncidenceFamily.LONDON_YORKE:
            return LondonYorke(params["a"])
        if family is IncidenceFamily.POWER:
            return Power(params["alpha"])
        if family is IncidenceFamily.SATURATION:
            return Saturation(params["c"])
        if family is IncidenceFamily.EXPONENTIAL_SATURATION:
            return ExponentialSaturation(params["c"])
        if family is IncidenceFamily.LOG_SATURATION:
            return LogSaturation(params["c"])
        if family is IncidenceFamily.CAPASSO_SERIO:
            return CapassoSerio(params["g"], params.get("c"))
        return Custom(points=params["points"], values=params["values"])
    except KeyError as e:
        raise InputError(f"Incidence family '{family.value}' is missing parameter {e}")
