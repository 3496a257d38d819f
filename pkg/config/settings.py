"""
Configuration settings loaded from environment variables.
"""
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from dotenv import load_dotenv

from config.constants import (
    ANTICHAIN_CAP,
    CLAMP_WARN,
    CLASSIFICATION_TOL,
    CONFORMITY_GRID,
    CSV_FLOAT_FORMAT,
    CRITICAL_IDENTITY_TOL,
    DECAY_FIT_FLOOR,
    DECAY_FIT_START,
    DECAY_REL_TOL,
    EDGE_TOL,
    EQUILIBRIUM_TOL,
    ITERATION_CAP_BASE,
    ITERATION_CAP_PER_FEATURE,
    MATCH_TOL,
    MONOTONE_HORIZON,
    MONOTONE_SLACK,
    POLISH_DAMPING,
    POLISH_MAX_ITER,
    PSI_TOL,
    RESERVOIR_A,
    RESERVOIR_B,
    RESERVOIR_LEVEL_TOL,
    RESERVOIR_WEIGHT,
    RK_ATOL,
    RK_INITIAL_STEP,
    RK_MAX_STEPS,
    RK_RTOL,
    SPECTRAL_TOL,
    SUPPORT_BURN_IN,
    SUPPORT_TOL,
    SWEEP_MATCH_TOL,
    T_MAX,
    TRAJECTORY_STRIDE,
)

# Load environment variables
load_dotenv()

# Project paths
PROJECT_ROOT = Path(__file__).parent.parent
LOGS_DIR = Path(os.getenv("SIS_LOG_DIR", str(PROJECT_ROOT / "logs")))
MODELS_DIR = PROJECT_ROOT / "models"


def _env_float(name: str, default: float) -> float:
    value = os.getenv(name)
    return float(value) if value else default


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    return int(value) if value else default


@dataclass
class SpectralConfig:
    """Perron-root computation."""
    tol: float = field(default_factory=lambda: _env_float("SIS_SPECTRAL_TOL", SPECTRAL_TOL))
    iteration_cap_base: int = ITERATION_CAP_BASE
    iteration_cap_per_feature: int = ITERATION_CAP_PER_FEATURE
    psi_tol: float = PSI_TOL

    def iteration_cap(self, n: int) -> int:
        """Iteration cap for an n x n matrix."""
        return self.iteration_cap_per_feature * n + self.iteration_cap_base


@dataclass
class StructureConfig:
    """Atomic decomposition."""
    edge_tol: float = EDGE_TOL
    classification_tol: float = CLASSIFICATION_TOL
    antichain_cap: int = field(default_factory=lambda: _env_int("SIS_ANTICHAIN_CAP", ANTICHAIN_CAP))
    conformity_grid: int = CONFORMITY_GRID


@dataclass
class DynamicsConfig:
    """Semi-flow integration and equilibrium computation."""
    rtol: float = RK_RTOL
    atol: float = RK_ATOL
    initial_step: float = RK_INITIAL_STEP
    max_steps: int = RK_MAX_STEPS
    t_max: float = field(default_factory=lambda: _env_float("SIS_T_MAX", T_MAX))
    support_tol: float = SUPPORT_TOL
    support_burn_in: float = SUPPORT_BURN_IN
    equilibrium_tol: float = field(default_factory=lambda: _env_float("SIS_EQUILIBRIUM_TOL", EQUILIBRIUM_TOL))
    match_tol: float = field(default_factory=lambda: _env_float("SIS_MATCH_TOL", MATCH_TOL))
    clamp_warn: float = CLAMP_WARN
    monotone_slack: float = MONOTONE_SLACK
    monotone_horizon: float = MONOTONE_HORIZON
    polish_max_iter: int = POLISH_MAX_ITER
    polish_damping: float = POLISH_DAMPING
    decay_fit_start: float = DECAY_FIT_START
    decay_fit_floor: float = DECAY_FIT_FLOOR
    decay_rel_tol: float = DECAY_REL_TOL
    critical_identity_tol: float = CRITICAL_IDENTITY_TOL
    sweep_match_tol: float = SWEEP_MATCH_TOL


@dataclass
class ReservoirConfig:
    """Defaults of the external-reservoir augmentation."""
    a: float = RESERVOIR_A
    b: float = RESERVOIR_B
    r_weight: float = RESERVOIR_WEIGHT
    level_tol: float = RESERVOIR_LEVEL_TOL


@dataclass
class RunConfig:
    """Runner options."""
    workers: int = field(default_factory=lambda: _env_int("SIS_WORKERS", 1))
    log_dir: Path = LOGS_DIR
    trajectory_stride: int = TRAJECTORY_STRIDE
    float_format: str = CSV_FLOAT_FORMAT


@dataclass
class Settings:
    """Main settings container."""
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    structure: StructureConfig = field(default_factory=StructureConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    reservoir: ReservoirConfig = field(default_factory=ReservoirConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def to_dict(self) -> dict:
        """Flatten into a dictionary for reports."""
        out: dict[str, Any] = {}
        for group in (self.spectral, self.structure, self.dynamics, self.reservoir, self.run):
            prefix = type(group).__name__.replace("Config", "").lower()
            for f in fields(group):
                out[f"{prefix}.{f.name}"] = getattr(group, f.name)
        return out


# Global settings instance
settings = Settings()

# CLI --tol names mapped to (group, attribute)
TOLERANCE_KEYS: dict[str, tuple[str, str]] = {
    "spectral": ("spectral", "tol"),
    "psi": ("spectral", "psi_tol"),
    "classification": ("structure", "classification_tol"),
    "support": ("dynamics", "support_tol"),
    "equilibrium": ("dynamics", "equilibrium_tol"),
    "match": ("dynamics", "match_tol"),
    "rtol": ("dynamics", "rtol"),
    "atol": ("dynamics", "atol"),
    "t_max": ("dynamics", "t_max"),
}


def get_settings() -> Settings:
    """Get global settings instance."""
    return settings


def apply_overrides(overrides: Optional[dict[str, float]] = None) -> Settings:
    """
    Override documented tolerances on the global settings.

    Args:
        overrides: Mapping of tolerance name (see TOLERANCE_KEYS) to value

    Returns:
        The updated global settings

    Raises:
        KeyError: Unknown tolerance name
    """
    for name, value in (overrides or {}).items():
        if name not in TOLERANCE_KEYS:
            raise KeyError(f"Unknown tolerance '{name}'; expected one of {sorted(TOLERANCE_KEYS)}")
        group, attr = TOLERANCE_KEYS[name]
        setattr(getattr(settings, group), attr, float(value))
    return settings


def reset_settings() -> Settings:
    """Restore defaults (used by tests)."""
    global settings
    settings = Settings()
    return settings
