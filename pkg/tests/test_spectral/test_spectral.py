"""
Tests for spectral radius, reproduction numbers and spectral-bound tools.
"""
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from config.constants import SpectralSign
from config.settings import get_settings
from core.errors import ConvergenceError, DomainError, InputError, PreconditionError
from core.model import full_mask, mask_from_labels
from dynamics import maximal_equilibrium
from spectral import (
    R0,
    Re,
    check_equilibrium_eigenpair,
    check_supersolution,
    equilibrium_operator,
    psi,
    schwartz_radius,
    spectral_bound_sign,
    spectral_radius,
    supersolution_eigenpair,
)
from structure.atoms import decompose, supercritical_antichains

from tests.conftest import FAST_SEEDS, build_random_model


class TestSpectralRadius:
    """Test the per-class power iteration."""

    def test_periodic_block(self):
        assert spectral_radius(np.array([[0.0, 2.0], [2.0, 0.0]])).radius == pytest.approx(2.0, abs=1e-9)

    def test_nilpotent(self):
        assert spectral_radius(np.array([[0.0, 1.0], [0.0, 0.0]])).radius == 0.0

    def test_triangular_uses_largest_diagonal_block(self):
        M = np.array([[1.0, 0.0, 0.0], [5.0, 3.0, 0.0], [0.0, 5.0, 2.0]])
        result = spectral_radius(M)
        assert result.radius == pytest.approx(3.0, abs=1e-9)
        assert result.classes == 3

    def test_eigenvector(self, zoonosis_model):
        result = spectral_radius(zoonosis_model.matrix, want_vector=True)
        v = result.eigenvector
        assert v is not None
        assert np.all(v >= 0.0) and v.max() == pytest.approx(1.0)
        np.testing.assert_allclose(zoonosis_model.matrix @ v, result.radius * v, atol=1e-8)

    def test_eigenvector_with_downstream_features(self):
        M = np.array([[2.0, 0.0], [1.0, 0.5]])
        result = spectral_radius(M, want_vector=True)
        np.testing.assert_allclose(M @ result.eigenvector, 2.0 * result.eigenvector, atol=1e-9)
        assert result.eigenvector[1] > 0.0

    @pytest.mark.parametrize("M", [
        np.array([[1.0, -0.5], [0.0, 1.0]]),
        np.ones((2, 3)),
        np.array([[np.nan]]),
    ])
    def test_rejects_bad_input(self, M):
        with pytest.raises(InputError):
            spectral_radius(M)

    def test_iteration_cap(self):
        config = get_settings().spectral
        config.iteration_cap_base = 0
        config.iteration_cap_per_feature = 1
        with pytest.raises(ConvergenceError) as info:
            spectral_radius(np.array([[1.0, 1.0], [1.0, 2.0]]))
        assert info.value.best_estimate == pytest.approx((3.0 + np.sqrt(5.0)) / 2.0, abs=0.5)

    @given(st.integers(min_value=0, max_value=10_000))
    def test_matches_dense_eigenvalues(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 7))
        M = np.where(rng.random((n, n)) < 0.5, rng.uniform(0.0, 3.0, (n, n)), 0.0)
        expected = float(np.max(np.abs(np.linalg.eigvals(M))))
        assert spectral_radius(M).radius == pytest.approx(expected, abs=1e-7)

    @staticmethod
    def _random_nonnegative(rng, n):
        return np.where(rng.random((n, n)) < 0.5, rng.uniform(0.0, 3.0, (n, n)), 0.0)

    @given(st.integers(min_value=0, max_value=10_000))
    def test_monotone_in_entries(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 7))
        M = self._random_nonnegative(rng, n)
        N = M + self._random_nonnegative(rng, n)
        assert spectral_radius(M).radius <= spectral_radius(N).radius + 1e-8

    @given(st.integers(min_value=0, max_value=10_000))
    def test_product_order_does_not_matter(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 7))
        M = self._random_nonnegative(rng, n)
        N = self._random_nonnegative(rng, n)
        assert spectral_radius(M @ N).radius == pytest.approx(spectral_radius(N @ M).radius, rel=1e-8, abs=1e-7)

    @given(st.integers(min_value=0, max_value=10_000), st.floats(min_value=0.01, max_value=5.0))
    def test_diagonal_shift(self, seed, delta):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 7))
        M = self._random_nonnegative(rng, n)
        shifted = spectral_radius(M + delta * np.eye(n)).radius
        assert shifted == pytest.approx(spectral_radius(M).radius + delta, rel=1e-9, abs=1e-7)


class TestReproductionNumbers:
    """Test R0, Re and the max-over-atoms formula."""

    def test_zoonosis_r0(self, zoonosis_model):
        assert R0(zoonosis_model) == pytest.approx(2.0, abs=1e-9)

    def test_westnile_r0(self, westnile_model):
        assert R0(westnile_model) == pytest.approx(2.0, abs=1e-9)

    def test_empty_set(self, zoonosis_model):
        assert R0(zoonosis_model, np.zeros(3, dtype=bool)) == 0.0

    def test_scalar(self, scalar_model):
        assert R0(scalar_model(3.0, gamma=2.0)) == pytest.approx(1.5)

    def test_re_extremes(self, zoonosis_model):
        assert Re(zoonosis_model, np.ones(3)) == pytest.approx(R0(zoonosis_model), abs=1e-12)
        assert Re(zoonosis_model, np.zeros(3)) == 0.0

    def test_re_rejects_out_of_range(self, zoonosis_model):
        with pytest.raises(InputError):
            Re(zoonosis_model, [1.2, 0.0, 0.0])

    def test_schwartz_on_zoonosis(self, zoonosis_model):
        decomposition = decompose(zoonosis_model)
        for atom in decomposition.atoms:
            assert schwartz_radius(zoonosis_model, decomposition, atom.future) == pytest.approx(
                R0(zoonosis_model, atom.future), abs=1e-8)

    def test_schwartz_needs_union_of_atoms(self, westnile_model):
        decomposition = decompose(westnile_model)
        with pytest.raises(DomainError):
            schwartz_radius(westnile_model, decomposition, mask_from_labels(westnile_model.space, ["B"]))

    @pytest.mark.parametrize("seed", FAST_SEEDS)
    def test_schwartz_on_random_futures(self, seed):
        model = build_random_model(seed)
        decomposition = decompose(model)
        sets = [atom.future for atom in decomposition.atoms]
        sets += [decomposition.future_of(c) for c in supercritical_antichains(decomposition)]
        sets.append(full_mask(model.n))
        for A in sets:
            assert abs(R0(model, A) - schwartz_radius(model, decomposition, A)) <= 1e-8


class TestSpectralBound:
    """Test the sign of s(T - gamma)."""

    @pytest.mark.parametrize("k, sign, value", [
        (0.5, SpectralSign.NEGATIVE, -0.5),
        (1.0, SpectralSign.ZERO, 0.0),
        (2.0, SpectralSign.POSITIVE, 1.0),
    ])
    def test_scalar(self, scalar_model, k, sign, value):
        bound = spectral_bound_sign(scalar_model(k))
        assert bound.sign is sign
        assert bound.value == pytest.approx(value, abs=1e-9)
        assert bound.consistent

    @pytest.mark.parametrize("seed", FAST_SEEDS)
    def test_agrees_with_r0(self, seed):
        assert spectral_bound_sign(build_random_model(seed)).consistent


class TestSupersolution:
    """Test the eigenpair of T - gamma and supersolution certificates."""

    def test_scalar_eigenpair(self, scalar_model):
        pair = supersolution_eigenpair(scalar_model(2.0))
        assert pair.lam == pytest.approx(1.0, abs=1e-8)
        assert pair.psi_root == pytest.approx(1.0, abs=1e-8)
        assert psi(scalar_model(2.0), pair.psi_root) == pytest.approx(1.0, abs=1e-9)

    def test_eigenpair_residual(self, westnile_model):
        pair = supersolution_eigenpair(westnile_model)
        assert pair.lam == pytest.approx(1.0, abs=1e-8)
        assert pair.residual <= 1e-8
        assert np.all(pair.w >= 0.0)

    def test_needs_supercritical(self, scalar_model):
        with pytest.raises(PreconditionError, match="R0 > 1"):
            supersolution_eigenpair(scalar_model(0.5))

    def test_equality(self, zoonosis_model):
        cert = check_supersolution(zoonosis_model, [0.0, 0.0, 1.0], 2.0)
        assert cert.certified and cert.refinement == "equality"
        assert cert.conclusion == "rho = 2"

    def test_strict(self, zoonosis_model):
        cert = check_supersolution(zoonosis_model, np.ones(3), 1.5)
        assert cert.refinement == "strict"

    def test_bound(self, zoonosis_model):
        cert = check_supersolution(zoonosis_model, np.ones(3), 2.0)
        assert cert.refinement == "bound"

    def test_refused(self, zoonosis_model):
        cert = check_supersolution(zoonosis_model, np.ones(3), 2.5)
        assert not cert
        assert cert.offending_label == "W"

    def test_invalid_candidate(self, zoonosis_model):
        with pytest.raises(InputError):
            check_supersolution(zoonosis_model, np.zeros(3), 1.0)
        with pytest.raises(InputError):
            check_supersolution(zoonosis_model, np.ones(3), 0.0)


class TestEquilibriumOperator:
    """Test L_g = M_phi(g) T M_{1/gamma} at equilibria."""

    def test_matches_incidence_times_next_generation(self, zoonosis_model):
        g = np.array([0.5, 0.25, 0.0])
        L = equilibrium_operator(zoonosis_model, g)
        np.testing.assert_allclose(L, np.diag(1.0 - g) @ zoonosis_model.next_generation)

    def test_radius_is_re_of_incidence(self, westnile_model):
        g = np.array([0.3, 0.6, 0.1])
        rho = spectral_radius(equilibrium_operator(westnile_model, g)).radius
        assert rho == pytest.approx(Re(westnile_model, westnile_model.incidence(g)), abs=1e-9)

    def test_maximal_equilibrium(self, zoonosis_model):
        g = maximal_equilibrium(zoonosis_model).state
        check = check_equilibrium_eigenpair(zoonosis_model, g)
        assert check.passed
        assert check.support_size == 3
        assert check.rho_on_support == pytest.approx(1.0, abs=1e-6)
        assert check.rho == pytest.approx(1.0, abs=1e-6)

    def test_non_maximal_equilibrium(self, zoonosis_model):
        check = check_equilibrium_eigenpair(zoonosis_model, [0.0, 0.0, 0.5])
        assert check.passed
        assert check.rho_on_support == pytest.approx(1.0, abs=1e-9)
        assert check.rho == pytest.approx(2.0, abs=1e-9)

    def test_disease_free_state(self, zoonosis_model):
        check = check_equilibrium_eigenpair(zoonosis_model, np.zeros(3))
        assert check.passed
        assert check.support_size == 0
        assert check.rho == pytest.approx(R0(zoonosis_model), abs=1e-9)

    def test_non_equilibrium_fails(self, zoonosis_model):
        check = check_equilibrium_eigenpair(zoonosis_model, np.ones(3))
        assert not check.is_eigenvector
        assert check.eigen_residual == pytest.approx(1.0)
        assert not check.passed
        assert check.to_dict()["passed"] is False

    @pytest.mark.parametrize("seed", FAST_SEEDS)
    def test_random_maximal_equilibria(self, seed):
        model = build_random_model(seed)
        check = check_equilibrium_eigenpair(model, maximal_equilibrium(model).state)
        assert check.passed, check.to_dict()
