"""
Analysis constants: tolerances, caps and enumerations.
"""
from enum import Enum, IntEnum
from typing import Final


class IncidenceFamily(Enum):
    """Catalog of incidence functions phi."""
    MASS_ACTION = "mass_action"
    LONDON_YORKE = "london_yorke"
    POWER = "power"
    SATURATION = "saturation"
    EXPONENTIAL_SATURATION = "exponential_saturation"
    LOG_SATURATION = "log_saturation"
    CAPASSO_SERIO = "capasso_serio"
    CUSTOM = "custom"


class AtomClass(Enum):
    """Classification of an atom by its basic reproduction number."""
    ZERO = "zero"
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


class TerminalReason(Enum):
    """Why an integration stopped."""
    RESIDUAL_CONVERGED = "residual_converged"
    T_MAX_REACHED = "t_max_reached"
    STEP_FAILURE = "step_failure"


class SpectralSign(Enum):
    """Sign of the spectral bound s(T - gamma)."""
    NEGATIVE = "-"
    ZERO = "0"
    POSITIVE = "+"


class ExitCode(IntEnum):
    """Process exit codes of the command-line runner."""
    SUCCESS = 0
    INPUT_ERROR = 2
    RESOURCE_CAP = 3
    CONVERGENCE_FAILURE = 4
    INTERRUPTED = 130


# Spectral radius (power iteration with per-class shift)
SPECTRAL_TOL: Final[float] = 1e-10
ITERATION_CAP_BASE: Final[int] = 1000
ITERATION_CAP_PER_FEATURE: Final[int] = 100

# Supersolution eigenpair (bisection on psi(a) = rho(T M_{1/(gamma+a)}))
PSI_TOL: Final[float] = 1e-9
SUPERSOLUTION_SLACK: Final[float] = 1e-12

# Atomic structure
EDGE_TOL: Final[float] = 0.0
CLASSIFICATION_TOL: Final[float] = 1e-9
ANTICHAIN_CAP: Final[int] = 20

# Incidence conformity
CONFORMITY_GRID: Final[int] = 4096
MIN_CONFORMITY_GRID: Final[int] = 16
NORMALIZATION_TOL: Final[float] = 1e-12
PLATEAU_TOL: Final[float] = 1e-14

# Dynamics
SUPPORT_TOL: Final[float] = 1e-8
SUPPORT_BURN_IN: Final[float] = 1.0
EQUILIBRIUM_TOL: Final[float] = 1e-10
MATCH_TOL: Final[float] = 1e-6
T_MAX: Final[float] = 1e4
CLAMP_WARN: Final[float] = 1e-9
MONOTONE_SLACK: Final[float] = 1e-9
MONOTONE_HORIZON: Final[float] = 50.0
RK_RTOL: Final[float] = 1e-10
RK_ATOL: Final[float] = 1e-12
RK_INITIAL_STEP: Final[float] = 1e-3
RK_MAX_STEPS: Final[int] = 2_000_000
POLISH_MAX_ITER: Final[int] = 500
POLISH_DAMPING: Final[float] = 0.5
DECAY_FIT_START: Final[float] = 5.0
DECAY_FIT_FLOOR: Final[float] = 1e-12
DECAY_REL_TOL: Final[float] = 0.1

# Validation harness
CRITICAL_IDENTITY_TOL: Final[float] = 1e-6
SWEEP_MATCH_TOL: Final[float] = 1e-5
SWEEP_ZERO_OUT_PROB: Final[float] = 0.5

# Reservoir defaults
RESERVOIR_A: Final[float] = 0.5
RESERVOIR_B: Final[float] = 1.0
RESERVOIR_WEIGHT: Final[float] = 1.0
RESERVOIR_LEVEL_TOL: Final[float] = 1e-9
RESERVOIR_LABEL: Final[str] = "reservoir"

# Output
CSV_FLOAT_FORMAT: Final[str] = "%.17g"
TRAJECTORY_STRIDE: Final[int] = 1

# Logging
LOG_DATE_FORMAT: Final[str] = "%Y-%m-%d %H:%M:%S"
SYSTEM_LOG_FILENAME: Final[str] = "analysis.log"
EVENT_LOG_FILENAME: Final[str] = "events.json"
