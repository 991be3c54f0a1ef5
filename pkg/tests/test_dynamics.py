import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from sumuncertainty.core import (
    KET_0,
    KET_1,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DimensionMismatchError,
    HermitianObservable,
    RandomSource,
    ResourceGuardError,
    StateVector,
    sample_haar_state,
    sample_hermitian,
    uncertainty,
)
from sumuncertainty.dynamics import (
    OverlapDistance,
    convergence_ratio,
    evolve,
    fubini_study_distance,
    numeric_speed,
    quantum_speed,
    speed_subadditivity,
    velocity_bound_check,
    velocity_operator,
)

seeds = st.integers(0, 2**64 - 1)


class TestDistance:
    def test_self(self, rng):
        psi = sample_haar_state(5, rng)
        assert fubini_study_distance(psi, psi).value == pytest.approx(0.0, abs=1e-15)

    def test_global_phase(self, rng):
        psi = sample_haar_state(5, rng)
        assert fubini_study_distance(psi, psi.with_phase(1.3)).value == pytest.approx(0.0, abs=1e-15)

    def test_orthogonal(self):
        assert fubini_study_distance(KET_0, KET_1).value == 1.0

    def test_range_enforced(self):
        with pytest.raises(ValueError):
            OverlapDistance(1.5)

    def test_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            fubini_study_distance(KET_0, StateVector.basis(3, 0))

    @given(seeds, st.sampled_from([2, 3, 8]), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
    def test_phase_invariance_and_symmetry(self, seed, dim, a, b):
        rng = RandomSource(seed, 0)
        p, q = sample_haar_state(dim, rng), sample_haar_state(dim, rng)
        base = fubini_study_distance(p, q).value
        assert fubini_study_distance(p.with_phase(a), q.with_phase(b)).value == pytest.approx(base, abs=1e-15)
        assert fubini_study_distance(q, p).value == pytest.approx(base, abs=1e-15)
        overlap = abs(np.vdot(p.amplitudes, q.amplitudes)) ** 2
        assert base == pytest.approx(math.sqrt(max(0.0, 1 - overlap)), abs=1e-12)


class TestSpeed:
    def test_eigenvector(self):
        assert quantum_speed(PAULI_Z, KET_0) == 0.0

    def test_x_on_zero(self):
        assert quantum_speed(PAULI_X, KET_0) == 1.0

    def test_shift(self, rng):
        H, psi = sample_hermitian(4, rng), sample_haar_state(4, rng)
        assert quantum_speed(H.shifted(12.5), psi) == pytest.approx(quantum_speed(H, psi), abs=1e-10)

    def test_evolve_matches_expm(self, rng):
        H, psi = sample_hermitian(6, rng), sample_haar_state(6, rng)
        np.testing.assert_allclose(evolve(H, psi, 0.37).amplitudes, expm(-0.37j * H.matrix) @ psi.amplitudes, atol=1e-12)

    @pytest.mark.parametrize("dt", [1e-3, 0.1, 1.0])
    def test_numeric_eigenvector(self, dt):
        assert numeric_speed(PAULI_Z, KET_0, dt) == pytest.approx(0.0, abs=1e-15)

    def test_numeric_pauli(self):
        # exact evolution gives dD = |sin dt|
        assert numeric_speed(PAULI_X, KET_0, 1e-3) == pytest.approx(1.0, abs=1e-6)
        assert numeric_speed(PAULI_X, KET_0, 0.5) == pytest.approx(math.sin(0.5) / 0.5, abs=1e-14)

    def test_halving_ratio(self):
        assert convergence_ratio(PAULI_X, KET_0, 1e-3) == pytest.approx(4.0, abs=0.5)

    def test_guards(self):
        with pytest.raises(ValueError):
            numeric_speed(PAULI_X, KET_0, 0.0)
        big = HermitianObservable.identity(513)
        with pytest.raises(ResourceGuardError):
            numeric_speed(big, StateVector.basis(513, 0), 1e-3)

    @given(seeds, st.sampled_from([2, 4, 8, 16]))
    def test_second_order_convergence(self, seed, dim):
        rng = RandomSource(seed, 0)
        H, psi = sample_hermitian(dim, rng), sample_haar_state(dim, rng)
        for dt in (1e-2, 5e-3):
            assert convergence_ratio(H, psi, dt) == pytest.approx(4.0, abs=0.5)


class TestSubadditivity:
    def test_cancel(self, rng):
        H, psi = sample_hermitian(3, rng), sample_haar_state(3, rng)
        r = speed_subadditivity(H, H, psi, -1)
        assert r.combined == 0.0
        assert r.slack == pytest.approx(2 * quantum_speed(H, psi))

    def test_paulis(self):
        r = speed_subadditivity(PAULI_X, PAULI_Y, KET_0, 1)
        assert r.combined == pytest.approx(math.sqrt(2), abs=1e-15)
        assert r.individual == (1.0, 1.0)
        assert r.slack == pytest.approx(2 - math.sqrt(2), abs=1e-15)

    def test_constant_hamiltonian(self, rng):
        H, psi = sample_hermitian(4, rng), sample_haar_state(4, rng)
        r = speed_subadditivity(H, 3.0 * HermitianObservable.identity(4), psi, 1)
        assert r.combined == pytest.approx(quantum_speed(H, psi), abs=1e-12)
        assert r.slack == pytest.approx(0.0, abs=1e-12)

    def test_bad_sign(self):
        with pytest.raises(ValueError):
            speed_subadditivity(PAULI_X, PAULI_Y, KET_0, 2)

    @given(seeds, st.sampled_from([2, 4, 8, 16]), st.sampled_from([1, -1]))
    def test_property(self, seed, dim, sign):
        rng = RandomSource(seed, 0)
        r = speed_subadditivity(sample_hermitian(dim, rng), sample_hermitian(dim, rng), sample_haar_state(dim, rng), sign)
        assert r.holds()


class TestVelocity:
    def test_commuting(self):
        v = velocity_operator(PAULI_Z, 2.0 * PAULI_Z)
        assert np.all(v.matrix == 0)

    def test_x_y(self):
        np.testing.assert_allclose(velocity_operator(PAULI_X, PAULI_Y).matrix, 2 * PAULI_Z.matrix, atol=1e-15)

    def test_hermitian_output(self, rng):
        x, H = sample_hermitian(8, rng), sample_hermitian(8, rng)
        v = velocity_operator(x, H).matrix
        assert np.max(np.abs(v - v.conj().T)) <= 1e-12
        # i * anti-Hermitian, checked against the explicit formula
        np.testing.assert_allclose(v, (x.matrix @ H.matrix - H.matrix @ x.matrix) / 1j, atol=1e-12)

    def test_commuting_bound(self, rng):
        x = HermitianObservable.diagonal([1.0, 2.0, 3.0])
        r = velocity_bound_check(x, HermitianObservable.diagonal([0.0, 1.0, 5.0]), x, sample_haar_state(3, rng))
        assert r.value == pytest.approx(0.0, abs=1e-15)
        assert r.margin >= 0

    def test_pauli_saturation(self):
        r = velocity_bound_check(PAULI_X, PAULI_Y, PAULI_Z, KET_0)
        assert r.value == pytest.approx(2.0, abs=1e-12)
        assert r.bound == pytest.approx(2.0, abs=1e-12)
        assert abs(r.margin) <= 1e-12

    def test_random_dim8_trials(self):
        for s in range(1000):
            rng = RandomSource(8, s)
            x, h1, h2 = (sample_hermitian(8, rng) for _ in range(3))
            r = velocity_bound_check(x, h1, h2, sample_haar_state(8, rng))
            assert r.margin >= -1e-10
            assert r.robertson_margin >= -1e-10
            assert r.sum_relation_margin >= -1e-10

    def test_robertson_step(self, rng):
        x, H = sample_hermitian(4, rng), sample_hermitian(4, rng)
        psi = sample_haar_state(4, rng)
        r = velocity_bound_check(x, H, 0.0 * H, psi)
        assert r.robertson_bound == pytest.approx(2 * uncertainty(x, psi) * uncertainty(H, psi))
