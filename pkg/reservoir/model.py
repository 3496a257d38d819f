"""
SIS model with an external reservoir of infection.

The reservoir model u' = phi(u)(Tu + kappa) - gamma u is an ordinary SIS
model on one extra feature r whose level is held at a: column r of the
kernel carries kappa / a, the (r, r) entry carries b and gamma_r = b phi(a),
so that u_r = a is stationary and the dynamics on the base features are
exactly the reservoir dynamics.
"""
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np
from scipy.integrate import solve_ivp

from config.constants import RESERVOIR_LABEL, RK_ATOL, RK_RTOL
from config.settings import get_settings
from core.errors import InputError, PreconditionError
from core.model import FeatureSpace, SISModel, as_state, as_vector
from dynamics.integrator import Trajectory, integrate

logger = logging.getLogger(__name__)


def _default(attr: str):
    return field(default_factory=lambda: getattr(get_settings().reservoir, attr))


@dataclass(frozen=True, eq=False)
class ReservoirModel:
    """
    Base model plus a reservoir transmission rate kappa(x) >= 0.

    a is the reservoir infection level, b the reservoir self-rate and
    r_weight the weight of the reservoir feature.
    """
    base: SISModel
    kappa: np.ndarray
    a: float = _default("a")
    b: float = _default("b")
    r_weight: float = _default("r_weight")

    def __post_init__(self):
        kappa = np.array(as_vector(self.base, self.kappa, "kappa"), dtype=float)
        if not np.all(np.isfinite(kappa)):
            raise InputError("kappa must be finite")
        if np.any(kappa < 0.0):
            raise InputError(f"kappa must be nonnegative, got minimum {kappa.min():.6g}")
        if not 0.0 < self.a < 1.0:
            raise InputError(f"reservoir level a must lie in (0, 1), got {self.a}")
        if self.b <= 0.0:
            raise InputError(f"reservoir self-rate b must be positive, got {self.b}")
        if self.r_weight <= 0.0:
            raise InputError(f"reservoir weight must be positive, got {self.r_weight}")
        if self.phi_a <= 0.0:
            raise PreconditionError(f"phi(a) = {self.phi_a:.6g} at a = {self.a}; the reservoir needs phi(a) > 0")
        kappa.setflags(write=False)
        object.__setattr__(self, "kappa", kappa)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def name(self) -> str:
        return f"{self.base.name}+{RESERVOIR_LABEL}"

    @property
    def phi_a(self) -> float:
        return float(self.base.incidence(float(self.a)))

    @property
    def kappa_support(self) -> np.ndarray:
        return self.kappa > 0.0

    @classmethod
    def from_immigration(
        cls,
        base: SISModel,
        p: Union[float, Iterable[float]],
        d: Union[float, Iterable[float]],
        **kwargs,
    ) -> "ReservoirModel":
        """
        SIS with immigration: a fraction p of the arrivals at rate d is
        infected. Maps to kappa = p d and gamma + (1 - p) d.
        """
        p = np.broadcast_to(np.asarray(p, dtype=float), (base.n,))
        d = np.broadcast_to(np.asarray(d, dtype=float), (base.n,))
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise InputError("immigration fraction p must lie in [0, 1]")
        if np.any(d < 0.0):
            raise InputError("immigration rate d must be nonnegative")
        shifted = base.replace(gamma=base.gamma + (1.0 - p) * d)
        return cls(base=shifted, kappa=p * d, **kwargs)

    @classmethod
    def from_birth_death(
        cls,
        base: SISModel,
        kappa: Iterable[float],
        mu0: Union[float, Iterable[float]],
        **kwargs,
    ) -> "ReservoirModel":
        """Reservoir model with a demographic turnover rate mu0 added to gamma."""
        mu0 = np.broadcast_to(np.asarray(mu0, dtype=float), (base.n,))
        if np.any(mu0 < 0.0):
            raise InputError("birth/death rate must be nonnegative")
        return cls(base=base.replace(gamma=base.gamma + mu0), kappa=kappa, **kwargs)


def _reservoir_label(labels: tuple[str, ...]) -> str:
    label, k = RESERVOIR_LABEL, 1
    while label in labels:
        label, k = f"{RESERVOIR_LABEL}_{k}", k + 1
    return label


def augment(rm: ReservoirModel) -> SISModel:
    """
    The (n + 1)-feature SIS model whose last feature is the reservoir.

    For any u with u_r = a, the vector field of the result restricted to
    the base features equals reservoir_vector_field(rm, u).
    """
    n = rm.n
    base = rm.base
    kernel = np.zeros((n + 1, n + 1))
    kernel[:n, :n] = base.kernel
    kernel[:n, n] = rm.kappa / rm.a / rm.r_weight
    kernel[n, n] = rm.b / rm.r_weight

    space = FeatureSpace(
        weights=np.append(base.weights, rm.r_weight),
        labels=base.labels + (_reservoir_label(base.labels),),
    )
    gamma = np.append(base.gamma, rm.b * rm.phi_a)
    return SISModel(space=space, kernel=kernel, gamma=gamma, incidence=base.incidence, name=rm.name)


def augmented_state(rm: ReservoirModel, h: Iterable[float]) -> np.ndarray:
    """(h, a)."""
    return np.append(as_state(rm.base, h), rm.a)


def reservoir_vector_field(rm: ReservoirModel, u: Iterable[float]) -> np.ndarray:
    """F_kappa(u) = phi(u) (T u + kappa) - gamma u."""
    base = rm.base
    u = as_vector(base, u, "state")
    return base.incidence(u) * (base.matrix @ u + rm.kappa) - base.gamma * u


def integrate_reservoir(
    rm: ReservoirModel,
    h: Iterable[float],
    t_max: Optional[float] = None,
    residual_tol: Optional[float] = None,
    checkpoints: Optional[Iterable[float]] = None,
) -> Trajectory:
    """Integrate the augmented model from (h, a)."""
    return integrate(augment(rm), augmented_state(rm, h), t_max=t_max,
                     residual_tol=residual_tol, checkpoints=checkpoints)


def integrate_direct(
    rm: ReservoirModel,
    h: Iterable[float],
    t_eval: Iterable[float],
    rtol: float = RK_RTOL,
    atol: float = RK_ATOL,
) -> np.ndarray:
    """
    Integrate u' = F_kappa(u) without augmentation.

    Returns:
        Array of shape (len(t_eval), n)
    """
    u0 = as_state(rm.base, h)
    t_eval = np.asarray(list(t_eval), dtype=float)
    solution = solve_ivp(
        lambda t, u: reservoir_vector_field(rm, u),
        (0.0, float(t_eval[-1])),
        u0,
        method="DOP853",
        t_eval=t_eval,
        rtol=rtol,
        atol=atol,
    )
    if not solution.success:
        raise InputError(f"direct reservoir integration failed: {solution.message}")
    return solution.y.T


def homogeneous_equilibrium(k: float, kappa: float, gamma: float) -> float:
    """
    Root in [0, 1] of (1 - u)(k u + kappa) = gamma u, the equilibrium of the
    one-feature reservoir model with mass-action incidence.
    """
    if k < 0.0 or kappa < 0.0 or gamma <= 0.0:
        raise InputError("need k >= 0, kappa >= 0 and gamma > 0")
    if k == 0.0:
        return kappa / (kappa + gamma)
    # k u^2 + (kappa + gamma - k) u - kappa = 0
    c = kappa + gamma - k
    root = (-c + np.sqrt(c * c + 4.0 * k * kappa)) / (2.0 * k)
    return float(max(root, 0.0))
