"""
Tests for the external-reservoir model and its augmentation.
"""
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from core.errors import InputError, PreconditionError
from core.model import FeatureSpace, SISModel, vector_field
from incidence.families import custom, mass_action
from reservoir import (
    ReservoirModel,
    ReservoirStructure,
    augment,
    augmented_state,
    homogeneous_equilibrium,
    integrate_direct,
    integrate_reservoir,
    reservoir_equilibria,
    reservoir_predict_limit,
    reservoir_vector_field,
)

from tests.conftest import FAST_SEEDS, build_random_reservoir, build_scalar_model

ZOONOSIS_D = (1.0 + np.sqrt(17.0)) / 8.0


class TestReservoirModel:
    """Test construction and the demographic variants."""

    def test_defaults_from_settings(self, zoonosis_model):
        rm = ReservoirModel(base=zoonosis_model, kappa=[0.0, 0.5, 0.0])
        assert (rm.a, rm.b, rm.r_weight) == (0.5, 1.0, 1.0)
        assert rm.name == "zoonosis+reservoir"
        assert rm.kappa_support.tolist() == [False, True, False]

    @pytest.mark.parametrize("kwargs", [
        {"kappa": [0.0, -0.1, 0.0]},
        {"kappa": [0.0, np.inf, 0.0]},
        {"kappa": [0.0, 0.5, 0.0], "a": 1.0},
        {"kappa": [0.0, 0.5, 0.0], "a": 0.0},
        {"kappa": [0.0, 0.5, 0.0], "b": 0.0},
        {"kappa": [0.0, 0.5, 0.0], "r_weight": -1.0},
    ])
    def test_invalid_parameters(self, zoonosis_model, kwargs):
        with pytest.raises(InputError):
            ReservoirModel(base=zoonosis_model, **kwargs)

    def test_kappa_length(self, zoonosis_model):
        with pytest.raises(InputError):
            ReservoirModel(base=zoonosis_model, kappa=[0.5])

    def test_phi_at_level_must_be_positive(self):
        step = custom(points=[0.0, 0.5, 1.0], values=[1.0, 0.0, 0.0])
        base = build_scalar_model(2.0, incidence=step)
        with pytest.raises(PreconditionError, match="phi\\(a\\)"):
            ReservoirModel(base=base, kappa=[1.0], a=0.75)

    def test_immigration(self):
        rm = ReservoirModel.from_immigration(build_scalar_model(2.0), p=0.5, d=2.0)
        assert rm.base.gamma.tolist() == [2.0]
        assert rm.kappa.tolist() == [1.0]

    def test_immigration_fraction_checked(self):
        with pytest.raises(InputError):
            ReservoirModel.from_immigration(build_scalar_model(2.0), p=1.5, d=1.0)

    def test_birth_death(self):
        rm = ReservoirModel.from_birth_death(build_scalar_model(2.0), kappa=[1.0], mu0=0.5)
        assert rm.base.gamma.tolist() == [1.5]


class TestAugmentation:
    """Test the augmented SIS model."""

    def test_contract(self, zoonosis_reservoir):
        model = augment(zoonosis_reservoir)
        assert model.n == 4
        assert model.labels == ("W", "D", "H", "reservoir")
        np.testing.assert_allclose(model.kernel[:3, 3], [0.0, 1.0, 0.0])
        assert model.kernel[3, 3] == 1.0
        np.testing.assert_allclose(model.kernel[3, :3], 0.0)
        assert model.gamma[3] == pytest.approx(0.5)

    def test_label_collision(self):
        base = SISModel(
            space=FeatureSpace.uniform(2, ["x", "reservoir"]),
            kernel=np.eye(2) * 2.0,
            gamma=np.ones(2),
            incidence=mass_action(),
        )
        assert augment(ReservoirModel(base=base, kappa=[0.1, 0.0])).labels[-1] == "reservoir_1"

    def test_fields_agree(self, zoonosis_reservoir):
        rng = np.random.default_rng(3)
        for _ in range(10):
            u = rng.uniform(0.0, 1.0, 3)
            augmented = vector_field(augment(zoonosis_reservoir), augmented_state(zoonosis_reservoir, u))
            np.testing.assert_allclose(augmented[:3], reservoir_vector_field(zoonosis_reservoir, u), atol=1e-12)
            assert abs(augmented[3]) <= 1e-15

    @pytest.mark.parametrize("seed", FAST_SEEDS)
    def test_reservoir_level_is_stationary(self, seed):
        rm = build_random_reservoir(seed, 0.5)
        trajectory = integrate_reservoir(rm, np.full(rm.n, 0.3), t_max=20.0, residual_tol=0.0)
        assert np.max(np.abs(trajectory.states[:, -1] - rm.a)) <= 1e-9

    @pytest.mark.parametrize("a", [0.25, 0.5])
    @pytest.mark.parametrize("seed", FAST_SEEDS)
    def test_conjugate_to_direct_integration(self, seed, a):
        rm = build_random_reservoir(seed, a)
        h = np.random.default_rng(seed).uniform(0.0, 1.0, rm.n)
        marks = np.linspace(1.0, 10.0, 10)
        trajectory = integrate_reservoir(rm, h, t_max=10.0, residual_tol=0.0, checkpoints=marks)
        direct = integrate_direct(rm, h, marks)
        for k, t in enumerate(marks):
            np.testing.assert_allclose(trajectory.state_at(t)[: rm.n], direct[k], atol=1e-6)

    def test_reservoir_atom_is_last(self, zoonosis_reservoir):
        structure = ReservoirStructure(zoonosis_reservoir)
        assert structure.reservoir_atom == 3
        assert structure.decomposition.atoms[3].is_supercritical
        assert structure.forced.tolist() == [False, True, True]
        assert structure.switchable == [0]


class TestReservoirEquilibria:
    """Test reservoir_equilibria and reservoir_predict_limit."""

    def test_zoonosis(self, zoonosis_reservoir):
        catalog = reservoir_equilibria(zoonosis_reservoir)
        assert len(catalog) == 2
        assert [r.support_labels for r in catalog] == [["D", "H"], ["W", "D", "H"]]
        assert catalog.maximal.support_bits == "111"
        np.testing.assert_allclose(catalog.records[0].state[:2], [0.0, ZOONOSIS_D], atol=1e-9)
        assert all(r.residual <= 1e-9 for r in catalog)

    def test_kappa_everywhere_gives_one_equilibrium(self, zoonosis_model):
        catalog = reservoir_equilibria(ReservoirModel(base=zoonosis_model, kappa=[0.1, 0.1, 0.1]))
        assert len(catalog) == 1
        assert catalog.records[0].support.all()
        assert catalog.records[0].is_maximal

    def test_zero_kappa_matches_plain_catalog_size(self, zoonosis_model):
        catalog = reservoir_equilibria(ReservoirModel(base=zoonosis_model, kappa=np.zeros(3)))
        assert len(catalog) == 4

    def test_immigration_converges(self, immigration_reservoir):
        trajectory = integrate_reservoir(immigration_reservoir, [0.0])
        assert trajectory.final_state[0] == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-8)
        catalog = reservoir_equilibria(immigration_reservoir)
        assert catalog.records[0].state[0] == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-8)

    @pytest.mark.parametrize("k, kappa, gamma, expected", [
        (2.0, 1.0, 1.0, 1.0 / np.sqrt(2.0)),
        (0.0, 1.0, 1.0, 0.5),
        (2.0, 0.0, 1.0, 0.5),
        (0.5, 0.0, 1.0, 0.0),
    ])
    def test_homogeneous_equilibrium(self, k, kappa, gamma, expected):
        assert homogeneous_equilibrium(k, kappa, gamma) == pytest.approx(expected, abs=1e-12)

    def test_homogeneous_equilibrium_rejects_bad_rates(self):
        with pytest.raises(InputError):
            homogeneous_equilibrium(1.0, 0.5, 0.0)

    def test_invalid_base_refused(self, zoonosis_model):
        base = zoonosis_model.replace(gamma=np.array([1.0, 0.0, 1.0]))
        with pytest.raises(PreconditionError, match="valid base model"):
            reservoir_equilibria(ReservoirModel(base=base, kappa=[0.0, 0.5, 0.0]))

    @pytest.mark.parametrize("h, support, maximal", [
        ([0.0, 0.0, 0.0], ["D", "H"], False),
        ([0.0, 0.0, 0.9], ["D", "H"], False),
        ([0.2, 0.0, 0.0], ["W", "D", "H"], True),
    ])
    def test_predict_limit(self, zoonosis_reservoir, h, support, maximal):
        record = reservoir_predict_limit(zoonosis_reservoir, h)
        assert record.support_labels == support
        assert record.is_maximal is maximal

    @pytest.mark.parametrize("seed", FAST_SEEDS)
    def test_random_limits_match_prediction(self, seed):
        rm = build_random_reservoir(seed, 0.5)
        catalog = reservoir_equilibria(rm)
        rng = np.random.default_rng(seed)
        for _ in range(4):
            h = rng.uniform(0.0, 1.0, rm.n)
            h[rng.random(rm.n) < 0.5] = 0.0
            predicted = reservoir_predict_limit(rm, h)
            final = integrate_reservoir(rm, h).final_state[: rm.n]
            assert np.max(np.abs(final - predicted.state)) <= 1e-5
            assert catalog.find_by_support(predicted.support) is not None

    @pytest.mark.slow
    @pytest.mark.parametrize("a", [0.25, 0.5])
    @pytest.mark.parametrize("seed", range(20))
    def test_conjugacy_sweep(self, seed, a):
        rm = build_random_reservoir(100 + seed, a)
        h = np.random.default_rng(100 + seed).uniform(0.0, 1.0, rm.n)
        marks = np.linspace(1.0, 10.0, 10)
        trajectory = integrate_reservoir(rm, h, t_max=10.0, residual_tol=0.0, checkpoints=marks)
        direct = integrate_direct(rm, h, marks)
        for k, t in enumerate(marks):
            np.testing.assert_allclose(trajectory.state_at(t)[: rm.n], direct[k], atol=1e-6)
