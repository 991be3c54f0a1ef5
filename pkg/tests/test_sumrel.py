import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import harmonic_packet, kinetic_reference, spectral_spread
from sumuncertainty.core import (
    KET_0,
    KET_PLUS,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DimensionMismatchError,
    HermitianObservable,
    RandomSource,
    StateVector,
    sample_haar_state,
    sample_hermitian,
    uncertainty,
)
from sumuncertainty.sumrel import (
    WeightedObservableSet,
    convexity_midpoint_check,
    convexity_midpoint_check_sets,
    equality_witness,
    kinetic_matrix,
    kinetic_potential_demo,
    multi_sum_gap,
    state_mixture_uncertainty,
    sum_uncertainty_gap,
    weighted_sum_gap,
)

seeds = st.integers(min_value=0, max_value=2**64 - 1)
dims = st.sampled_from([2, 3, 4, 8, 16])


class TestPairGap:
    def test_b_equals_a(self, rng):
        A, psi = sample_hermitian(4, rng), sample_haar_state(4, rng)
        g = sum_uncertainty_gap(A, A, psi)
        assert g.gap == pytest.approx(0.0, abs=1e-12)

    def test_b_is_minus_a(self, rng):
        A, psi = sample_hermitian(4, rng), sample_haar_state(4, rng)
        g = sum_uncertainty_gap(A, -A, psi)
        assert g.lhs == 0.0
        assert g.rhs == pytest.approx(2 * uncertainty(A, psi))
        assert g.gap == pytest.approx(2 * uncertainty(A, psi))

    def test_x_plus_y(self):
        g = sum_uncertainty_gap(PAULI_X, PAULI_Y, KET_0)
        assert g.lhs == pytest.approx(math.sqrt(2), abs=1e-15)
        assert g.rhs == pytest.approx(2.0, abs=1e-15)
        assert g.gap == pytest.approx(2 - math.sqrt(2), abs=1e-15)

    def test_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            sum_uncertainty_gap(PAULI_X, HermitianObservable.identity(3), KET_0)

    @given(seeds, dims)
    def test_theorem(self, seed, dim):
        rng = RandomSource(seed, 0)
        A, B, psi = sample_hermitian(dim, rng), sample_hermitian(dim, rng), sample_haar_state(dim, rng)
        g = sum_uncertainty_gap(A, B, psi)
        assert g.gap >= -1e-10
        assert g.holds()
        # oracle: spreads from eigen-decomposition measurement statistics
        assert g.lhs == pytest.approx(spectral_spread((A + B).matrix, psi.amplitudes), abs=1e-9)

    @given(seeds, dims)
    def test_reverse_triangle_and_difference(self, seed, dim):
        rng = RandomSource(seed, 0)
        A, B, psi = sample_hermitian(dim, rng), sample_hermitian(dim, rng), sample_haar_state(dim, rng)
        da, db = uncertainty(A, psi), uncertainty(B, psi)
        assert sum_uncertainty_gap(A, B, psi).lhs >= abs(da - db) - 1e-10
        assert uncertainty(A - B, psi) <= da + db + 1e-10


class TestMultiAndWeighted:
    def test_single(self, rng):
        A, psi = sample_hermitian(3, rng), sample_haar_state(3, rng)
        assert multi_sum_gap([A], psi).gap == 0.0

    def test_three_copies(self, rng):
        A, psi = sample_hermitian(3, rng), sample_haar_state(3, rng)
        g = multi_sum_gap([A, A, A], psi)
        assert g.lhs == pytest.approx(3 * uncertainty(A, psi), rel=1e-12)
        assert g.gap == pytest.approx(0.0, abs=1e-12)

    def test_paulis(self):
        g = multi_sum_gap([PAULI_X, PAULI_Y, PAULI_Z], KET_0)
        assert g.lhs == pytest.approx(math.sqrt(2), abs=1e-15)
        assert g.rhs == pytest.approx(2.0, abs=1e-15)

    def test_empty(self):
        with pytest.raises(ValueError):
            multi_sum_gap([], KET_0)

    def test_weighted_single_half(self, rng):
        A, psi = sample_hermitian(3, rng), sample_haar_state(3, rng)
        assert weighted_sum_gap(WeightedObservableSet((0.5,), (A,)), psi).gap == pytest.approx(0.0, abs=1e-15)

    def test_unit_weights_match_multi(self, rng):
        obs = tuple(sample_hermitian(4, rng) for _ in range(3))
        psi = sample_haar_state(4, rng)
        w = weighted_sum_gap(WeightedObservableSet((1.0, 1.0, 1.0), obs), psi)
        m = multi_sum_gap(obs, psi)
        assert w.lhs == pytest.approx(m.lhs, rel=1e-14)
        assert w.rhs == pytest.approx(m.rhs, rel=1e-14)

    def test_weighted_paulis(self):
        g = weighted_sum_gap(WeightedObservableSet((0.3, 0.7), (PAULI_X, PAULI_Y)), KET_0)
        assert g.lhs == pytest.approx(math.sqrt(0.58), abs=1e-15)
        assert g.rhs == pytest.approx(1.0, abs=1e-15)
        assert g.gap == pytest.approx(1 - math.sqrt(0.58), abs=1e-15)

    @pytest.mark.parametrize("weights", [(0.0, 1.0), (-0.5, 1.5)])
    def test_nonpositive_weights(self, weights):
        with pytest.raises(ValueError):
            WeightedObservableSet(weights, (PAULI_X, PAULI_Y))

    def test_mixed_dims(self):
        with pytest.raises(DimensionMismatchError):
            WeightedObservableSet((1.0, 1.0), (PAULI_X, HermitianObservable.identity(3)))

    def test_convex_flag(self):
        assert WeightedObservableSet((0.25, 0.75), (PAULI_X, PAULI_Y)).is_convex
        assert not WeightedObservableSet((1.0,), (PAULI_X,)).is_convex
        assert not WeightedObservableSet((0.5, 0.6), (PAULI_X, PAULI_Y)).is_convex

    @given(seeds, dims, st.integers(2, 6))
    def test_multi_property(self, seed, dim, k):
        rng = RandomSource(seed, 0)
        obs = [sample_hermitian(dim, rng) for _ in range(k)]
        assert multi_sum_gap(obs, sample_haar_state(dim, rng)).gap >= -1e-10

    @given(seeds, dims, st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=6))
    def test_weighted_property(self, seed, dim, weights):
        rng = RandomSource(seed, 0)
        obs = tuple(sample_hermitian(dim, rng) for _ in weights)
        g = weighted_sum_gap(WeightedObservableSet(tuple(weights), obs), sample_haar_state(dim, rng))
        assert g.gap >= -1e-10 * max(1.0, g.rhs)


class TestConvexity:
    def test_degenerate_midpoint(self, rng):
        obs = [sample_hermitian(3, rng) for _ in range(3)]
        c = convexity_midpoint_check(obs, [0.2, 0.3, 0.5], [0.2, 0.3, 0.5], sample_haar_state(3, rng))
        assert c.margin == pytest.approx(0.0, abs=1e-15)
        assert c.holds

    def test_commuting_diagonal_instances(self):
        # brute force over random diagonal observables, where everything is classical
        for s in range(200):
            rng = RandomSource(31, s)
            obs = [HermitianObservable.diagonal(rng.generator.standard_normal(4)) for _ in range(3)]
            psi = sample_haar_state(4, rng)
            p, q = rng.generator.dirichlet(np.ones(3)), rng.generator.dirichlet(np.ones(3))
            assert convexity_midpoint_check(obs, p, q, psi).holds

    def test_boundary_paulis(self):
        c = convexity_midpoint_check([PAULI_X, PAULI_Y], [1, 0], [0, 1], KET_0)
        assert c.lhs == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
        assert c.rhs == pytest.approx(1.0, abs=1e-15)
        assert c.holds

    def test_rejects_non_convex(self):
        with pytest.raises(ValueError):
            convexity_midpoint_check([PAULI_X, PAULI_Y], [0.5, 0.6], [0.5, 0.5], KET_0)

    def test_sets_require_same_observables(self):
        a = WeightedObservableSet((0.5, 0.5), (PAULI_X, PAULI_Y))
        b = WeightedObservableSet((0.5, 0.5), (PAULI_X, PAULI_Z))
        with pytest.raises(ValueError):
            convexity_midpoint_check_sets(a, b, KET_0)

    def test_sets(self):
        a = WeightedObservableSet((0.2, 0.8), (PAULI_X, PAULI_Y))
        b = WeightedObservableSet((0.7, 0.3), (PAULI_X, PAULI_Y))
        assert convexity_midpoint_check_sets(a, b, KET_0).holds

    def test_sets_require_convex(self):
        a = WeightedObservableSet((1.0, 1.0), (PAULI_X, PAULI_Y))
        with pytest.raises(ValueError):
            convexity_midpoint_check_sets(a, a, KET_0)

    @given(seeds, dims, st.integers(2, 5))
    def test_property(self, seed, dim, k):
        rng = RandomSource(seed, 0)
        obs = [sample_hermitian(dim, rng) for _ in range(k)]
        p, q = rng.generator.dirichlet(np.ones(k)), rng.generator.dirichlet(np.ones(k))
        assert convexity_midpoint_check(obs, p, q, sample_haar_state(dim, rng)).holds


class TestStateMixture:
    def test_identical_states(self, rng):
        A, psi = sample_hermitian(3, rng), sample_haar_state(3, rng)
        assert state_mixture_uncertainty([psi, psi], [0.4, 0.6], A) == pytest.approx(uncertainty(A, psi), rel=1e-14)

    def test_z_on_zero_and_plus(self):
        assert state_mixture_uncertainty([KET_0, KET_PLUS], [0.5, 0.5], PAULI_Z) == pytest.approx(0.5, abs=1e-15)

    def test_single(self, rng):
        A, psi = sample_hermitian(3, rng), sample_haar_state(3, rng)
        assert state_mixture_uncertainty([psi], [1.0], A) == uncertainty(A, psi)

    def test_count_mismatch(self):
        with pytest.raises(ValueError):
            state_mixture_uncertainty([KET_0], [0.5, 0.5], PAULI_Z)


class TestEqualityWitness:
    def test_unit(self, rng):
        A, psi = sample_hermitian(4, rng), sample_haar_state(4, rng)
        assert equality_witness(A, psi, 1.0, 0.0).gap == pytest.approx(0.0, abs=1e-12)

    def test_random_dim8(self, rng):
        A, psi = sample_hermitian(8, rng), sample_haar_state(8, rng)
        assert abs(equality_witness(A, psi, 3.0, -7.0).gap) <= 1e-10

    def test_pauli(self):
        g = equality_witness(PAULI_X, KET_0, 0.5, 2.0)
        assert g.lhs == pytest.approx(1.5, abs=1e-15)
        assert g.rhs == pytest.approx(1.5, abs=1e-15)

    @pytest.mark.parametrize("c", [0.0, -1.0])
    def test_rejects_nonpositive_c(self, c):
        with pytest.raises(ValueError):
            equality_witness(PAULI_X, KET_0, c, 0.0)

    @given(seeds, dims, st.floats(1e-2, 1e2), st.floats(-1e2, 1e2))
    def test_property(self, seed, dim, c, d):
        rng = RandomSource(seed, 0)
        g = equality_witness(sample_hermitian(dim, rng), sample_haar_state(dim, rng), c, d)
        assert abs(g.gap) <= max(1e-10, 1e-9 * g.rhs)


class TestKineticPotential:
    def test_kinetic_matrix_matches_reference(self):
        np.testing.assert_allclose(kinetic_matrix(7, 0.3).matrix, kinetic_reference(7, 0.3), atol=0)

    def test_eigenstate(self):
        n, h = 32, 0.25
        x = (np.arange(n) - (n - 1) / 2) * h
        v = 0.5 * x**2
        _, vecs = np.linalg.eigh(kinetic_reference(n, h) + np.diag(v))
        r = kinetic_potential_demo(n, h, v, StateVector(vecs[:, 3].astype(complex)))
        assert r.delta_h == pytest.approx(0.0, abs=1e-6)
        assert r.delta_t > 0 and r.delta_v > 0
        assert r.gap >= -1e-10

    def test_zero_potential(self, rng):
        psi = sample_haar_state(16, rng)
        r = kinetic_potential_demo(16, 0.1, np.zeros(16), psi)
        assert r.delta_v == 0.0
        assert r.delta_h == pytest.approx(r.delta_t, rel=1e-14)
        assert r.gap == pytest.approx(0.0, abs=1e-10)

    def test_harmonic_displaced_packet(self):
        # frozen from the spectral oracle in tests/oracles.py
        x, v, packet = harmonic_packet()
        r = kinetic_potential_demo(64, 0.2, v, StateVector(packet.astype(complex)))
        assert r.delta_h == pytest.approx(0.7071184200297265, abs=1e-10)
        assert r.delta_t == pytest.approx(0.3500413095175869, abs=1e-10)
        assert r.delta_v == pytest.approx(0.7905694150396464, abs=1e-10)
        assert r.gap == pytest.approx(0.43349230452750676, abs=1e-10)
        assert r.gap > 0

    def test_size_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            kinetic_potential_demo(4, 0.1, np.zeros(3), StateVector.basis(4, 0))
        with pytest.raises(DimensionMismatchError):
            kinetic_potential_demo(4, 0.1, np.zeros(4), StateVector.basis(5, 0))
