"""
Tests for the model data types, the operator T and the vector field.
"""
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from config.settings import apply_overrides, get_settings, reset_settings
from core.errors import DimensionError, InputError
from core.model import (
    AUTO_SATISFIED,
    FeatureSpace,
    SISModel,
    apply_T,
    as_state,
    mask_bits,
    mask_from_labels,
    mask_labels,
    project_model,
    support,
    validate_assumptions,
    vector_field,
)
from incidence.families import capasso_serio, mass_action

from tests.conftest import FAST_SEEDS, build_random_model


class TestFeatureSpace:
    """Test feature space construction."""

    def test_default_labels(self):
        space = FeatureSpace(weights=np.array([1.0, 2.0]))
        assert space.labels == ("feature_0", "feature_1")
        assert space.n == 2

    def test_rejects_nonpositive_weights(self):
        with pytest.raises(InputError, match="strictly positive"):
            FeatureSpace(weights=np.array([1.0, 0.0]))

    def test_rejects_duplicate_labels(self):
        with pytest.raises(InputError, match="unique"):
            FeatureSpace(weights=np.ones(2), labels=("a", "a"))

    def test_label_count_must_match(self):
        with pytest.raises(DimensionError):
            FeatureSpace(weights=np.ones(3), labels=("a", "b"))

    def test_unknown_label(self, zoonosis_model):
        with pytest.raises(InputError, match="Unknown feature label 'X'"):
            zoonosis_model.space.index_of("X")


class TestSISModel:
    """Test model construction and derived matrices."""

    def test_kernel_shape_checked(self):
        with pytest.raises(DimensionError):
            SISModel(FeatureSpace.uniform(2), np.ones((2, 3)), np.ones(2), mass_action())

    def test_gamma_length_checked(self):
        with pytest.raises(DimensionError):
            SISModel(FeatureSpace.uniform(2), np.ones((2, 2)), np.ones(3), mass_action())

    def test_non_finite_kernel_rejected(self):
        with pytest.raises(InputError, match="finite"):
            SISModel(FeatureSpace.uniform(1), np.array([[np.inf]]), np.ones(1), mass_action())

    def test_matrix_uses_source_weights(self):
        space = FeatureSpace(weights=np.array([1.0, 3.0]))
        model = SISModel(space, np.array([[1.0, 2.0], [0.0, 1.0]]), np.array([1.0, 2.0]), mass_action())
        np.testing.assert_allclose(model.matrix, [[1.0, 6.0], [0.0, 3.0]])
        np.testing.assert_allclose(model.next_generation, [[1.0, 3.0], [0.0, 1.5]])

    def test_scale_gamma(self, zoonosis_model):
        scaled = zoonosis_model.scale_gamma(2.0)
        np.testing.assert_allclose(scaled.gamma, 2.0 * zoonosis_model.gamma)
        np.testing.assert_array_equal(scaled.kernel, zoonosis_model.kernel)


class TestVectorField:
    """Test apply_T and F(u) = phi(u) T u - gamma u."""

    def test_apply_T(self, zoonosis_model):
        np.testing.assert_allclose(apply_T(zoonosis_model, [1.0, 0.0, 0.0]), [2.0, 1.0, 0.0])

    def test_field_at_zero_vanishes(self, zoonosis_model):
        np.testing.assert_array_equal(vector_field(zoonosis_model, np.zeros(3)), 0.0)

    def test_field_at_one_is_minus_gamma(self, zoonosis_model):
        np.testing.assert_allclose(vector_field(zoonosis_model, np.ones(3)), -zoonosis_model.gamma)

    def test_scalar_equilibrium(self, scalar_model):
        model = scalar_model(2.0)
        assert vector_field(model, [0.5])[0] == pytest.approx(0.0, abs=1e-15)

    def test_wrong_length(self, zoonosis_model):
        with pytest.raises(DimensionError):
            vector_field(zoonosis_model, [0.5, 0.5])

    @given(st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3))
    def test_field_points_inward_on_boundary(self, values):
        """F(u)_x >= 0 where u_x = 0 and F(u)_x <= 0 where u_x = 1."""
        from data.model_io import load_model
        from config.settings import MODELS_DIR

        model = load_model(MODELS_DIR / "zoonosis.model")
        u = np.array(values)
        u[0] = 0.0
        u[2] = 1.0
        f = vector_field(model, u)
        assert f[0] >= 0.0
        assert f[2] <= 0.0


class TestProjection:
    """Test T_A = M_A T M_A."""

    def test_projection_kills_outside(self, zoonosis_model):
        A = mask_from_labels(zoonosis_model.space, ["D", "H"])
        projected = project_model(zoonosis_model, A)
        np.testing.assert_allclose(projected.kernel[0], 0.0)
        np.testing.assert_allclose(projected.kernel[:, 0], 0.0)
        np.testing.assert_allclose(projected.kernel[1:, 1:], zoonosis_model.kernel[1:, 1:])
        np.testing.assert_array_equal(projected.gamma, zoonosis_model.gamma)

    @pytest.mark.parametrize("seed", FAST_SEEDS)
    def test_projected_operator_is_restricted_operator(self, seed):
        model = build_random_model(seed)
        rng = np.random.default_rng(seed)
        A = rng.random(model.n) < 0.5
        f = rng.uniform(0.0, 1.0, model.n)
        expected = np.where(A, apply_T(model, np.where(A, f, 0.0)), 0.0)
        np.testing.assert_allclose(apply_T(project_model(model, A), f), expected, atol=1e-14)

    def test_projection_is_idempotent(self, zoonosis_model):
        A = mask_from_labels(zoonosis_model.space, ["W", "H"])
        once = project_model(zoonosis_model, A)
        twice = project_model(once, A)
        np.testing.assert_array_equal(once.kernel, twice.kernel)


class TestMasksAndStates:
    """Test mask helpers and state conversion."""

    def test_mask_round_trip(self, zoonosis_model):
        mask = mask_from_labels(zoonosis_model.space, ["D"])
        assert mask_bits(mask) == "010"
        assert mask_labels(zoonosis_model.space, mask) == ["D"]

    def test_support_is_strict(self):
        np.testing.assert_array_equal(support(np.array([0.0, 1e-9, 0.2]), 1e-8), [False, False, True])

    def test_state_out_of_range(self, zoonosis_model):
        with pytest.raises(InputError, match=r"\[0, 1\]"):
            as_state(zoonosis_model, [0.5, 1.5, 0.0])


class TestValidateAssumptions:
    """Test validate_assumptions reports."""

    def test_valid_model(self, zoonosis_model):
        report = validate_assumptions(zoonosis_model)
        assert report.passed
        assert set(report.notes.values()) == {AUTO_SATISFIED}

    def test_zero_gamma(self, zoonosis_model):
        model = zoonosis_model.replace(gamma=np.array([1.0, 0.0, 1.0]))
        report = validate_assumptions(model)
        assert not report.passed
        assert any("gamma must be strictly positive" in v and "D" in v for v in report.violations)

    def test_negative_kernel(self, zoonosis_model):
        kernel = zoonosis_model.kernel.copy()
        kernel[0, 2] = -0.1
        report = validate_assumptions(zoonosis_model.replace(kernel=kernel))
        assert "kernel must be nonnegative (1 negative entries)" in report.violations

    def test_non_conforming_incidence(self, zoonosis_model):
        hump = capasso_serio(lambda u: u + 2.0 * u * u)
        report = validate_assumptions(zoonosis_model.replace(incidence=hump))
        assert not report.passed
        assert any(v.startswith("incidence:") for v in report.violations)
        assert "violation" in report.format_report()


class TestSettings:
    """Test tolerance overrides."""

    def test_override_and_reset(self):
        apply_overrides({"equilibrium": 1e-12})
        assert get_settings().dynamics.equilibrium_tol == 1e-12
        reset_settings()
        assert get_settings().dynamics.equilibrium_tol == 1e-10

    def test_unknown_name(self):
        with pytest.raises(KeyError, match="Unknown tolerance"):
            apply_overrides({"nonsense": 1.0})

    def test_iteration_cap(self):
        assert get_settings().spectral.iteration_cap(10) == 2000
