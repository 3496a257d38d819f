"""
Shared pytest fixtures for the SIS analyzer tests.
"""
import os
import sys
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pytest
from hypothesis import settings as hypothesis_settings

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import MODELS_DIR, reset_settings
from core.model import FeatureSpace, SISModel
from data.model_io import load_model, load_reservoir_model
from incidence.base import IncidenceFunction
from incidence.families import mass_action
from reservoir.model import ReservoirModel
from spectral.reproduction import R0
from structure.atoms import decompose

hypothesis_settings.register_profile("ci", max_examples=25, deadline=None, derandomize=True)
hypothesis_settings.register_profile("dev", max_examples=100, deadline=None)
hypothesis_settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))

# Random models keep every non-zero atom at least this far from R0 = 1
NEAR_CRITICAL_MARGIN = 0.05

FAST_SEEDS = [0, 1, 2, 3, 4]
ACCEPTANCE_SEEDS = list(range(50))


# ==============================================
# Settings
# ==============================================

@pytest.fixture(autouse=True)
def fresh_settings():
    """Every test starts from default tolerances."""
    reset_settings()
    yield
    reset_settings()


# ==============================================
# Model Builders
# ==============================================

def build_scalar_model(k: float, gamma: float = 1.0, incidence: Optional[IncidenceFunction] = None) -> SISModel:
    """One feature with kernel k and recovery rate gamma."""
    return SISModel(
        space=FeatureSpace.uniform(1, ["x"]),
        kernel=np.array([[k]]),
        gamma=np.array([gamma]),
        incidence=incidence or mass_action(),
        name=f"scalar[k={k:g}]",
    )


def build_continuum_model(grid: int = 32) -> SISModel:
    """
    Discretized continuum example on x = i / grid, i = 1..grid.

    T f = f(1) 1 with unit mass at x = 1, gamma(x) = x / 2, phi = 1 - id.
    """
    x = np.arange(1, grid + 1) / grid
    weights = np.full(grid, 1.0 / grid)
    weights[-1] = 1.0
    kernel = np.zeros((grid, grid))
    kernel[:, -1] = 1.0
    return SISModel(
        space=FeatureSpace(weights=weights, labels=tuple(f"x{i}" for i in range(1, grid + 1))),
        kernel=kernel,
        gamma=x / 2.0,
        incidence=mass_action(),
        name="continuum",
    )


def build_random_model(seed: int, max_features: int = 8) -> SISModel:
    """
    Sparse random model with R0 > 1 and no atom within
    NEAR_CRITICAL_MARGIN of criticality; redraws until both hold.
    """
    rng = np.random.default_rng(seed)
    while True:
        n = int(rng.integers(2, max_features + 1))
        density = rng.uniform(0.15, 0.5)
        kernel = np.where(rng.random((n, n)) < density, rng.uniform(0.2, 2.0, (n, n)), 0.0)
        model = SISModel(
            space=FeatureSpace(weights=rng.uniform(0.5, 1.5, n)),
            kernel=kernel,
            gamma=rng.uniform(0.2, 2.0, n),
            incidence=mass_action(),
            name=f"random[{seed}]",
        )
        decomposition = decompose(model)
        near = [a for a in decomposition.atoms if not a.is_zero and abs(a.r0 - 1.0) <= NEAR_CRITICAL_MARGIN]
        if not near and R0(model) > 1.0 + NEAR_CRITICAL_MARGIN:
            return model


def build_random_reservoir(seed: int, a: float) -> ReservoirModel:
    """Random base model with a random kappa, zero on about half of the features."""
    base = build_random_model(seed, max_features=6)
    rng = np.random.default_rng(10_000 + seed)
    kappa = np.where(rng.random(base.n) < 0.5, rng.uniform(0.1, 1.0, base.n), 0.0)
    return ReservoirModel(base=base, kappa=kappa, a=a)


# ==============================================
# Model Fixtures
# ==============================================

@pytest.fixture
def scalar_model() -> Callable[..., SISModel]:
    """Factory of one-feature models."""
    return build_scalar_model


@pytest.fixture
def zoonosis_model() -> SISModel:
    """W -> D -> H chain with self rates 2, gamma = 1, mass action."""
    return load_model(MODELS_DIR / "zoonosis.model")


@pytest.fixture
def westnile_model() -> SISModel:
    """B <-> M supercritical block feeding the zero atom H."""
    return load_model(MODELS_DIR / "westnile.model")


@pytest.fixture
def continuum_model() -> SISModel:
    return build_continuum_model()


@pytest.fixture
def random_model() -> Callable[[int], SISModel]:
    """Factory of seeded random models."""
    return build_random_model


@pytest.fixture
def zoonosis_reservoir() -> ReservoirModel:
    """Zoonosis with a reservoir infecting D."""
    return load_reservoir_model(MODELS_DIR / "zoonosis_reservoir.model")


@pytest.fixture
def immigration_reservoir() -> ReservoirModel:
    """Scalar k = 2, gamma = 1 with kappa = 1."""
    return load_reservoir_model(MODELS_DIR / "immigration.model")


@pytest.fixture
def random_reservoir() -> Callable[[int, float], ReservoirModel]:
    """Factory of seeded random reservoir models."""
    return build_random_reservoir


@pytest.fixture
def models_dir() -> Path:
    return MODELS_DIR
