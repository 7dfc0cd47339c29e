import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from ufsdetect.detection import (
    SegmentSpectrum,
    detect_attack,
    detect_segments,
    estimate_subspace_dim,
    hermitian_eigvals_desc,
    mdl_score,
    segment_autocorrelation,
    segment_dimension,
)
from ufsdetect.errors import InvalidParameterError, UnsupportedConfigurationError
from ufsdetect.rng import RngStream
from ufsdetect.signal_model import TrainingScenario, draw_cfo_plan, gen_channel, gen_qpsk_pilot, synthesize_received


def _mdl_oracle(lam, Q, d):
    """Printed MDL formula, term by term in plain Python."""
    M = len(lam)
    tail = lam[d:]
    return (
        -math.fsum(math.log(v) for v in tail)
        + (M - d) * math.log(math.fsum(tail) / (M - d))
        + d * (2 * M - d) * math.log(Q) / (2 * Q)
    )


def _random_psd(M, gen, rank=None):
    rank = M if rank is None else rank
    A = gen.standard_normal((M, rank)) + 1j * gen.standard_normal((M, rank))
    return A @ A.conj().T


def _spectra(draw_seed, count, M):
    gen = np.random.default_rng(draw_seed)
    for _ in range(count):
        lam = np.sort(gen.exponential(1.0, M) * gen.choice([1.0, 10.0, 100.0], M))[::-1]
        yield lam


class TestAutocorrelation:
    def test_zero(self):
        assert np.array_equal(segment_autocorrelation(np.zeros((8, 4))), np.zeros((4, 4)))

    def test_rank_one(self):
        gen = np.random.default_rng(0)
        u = gen.standard_normal(12) + 1j * gen.standard_normal(12)
        v = gen.standard_normal(4) + 1j * gen.standard_normal(4)
        c = 0.7 - 0.2j
        R = segment_autocorrelation(c * np.outer(u, v))
        assert np.linalg.matrix_rank(R, tol=1e-10) == 1
        expected_trace = abs(c) ** 2 * np.vdot(u, u).real * np.vdot(v, v).real / 12
        assert np.trace(R).real == pytest.approx(expected_trace, rel=1e-12)
        np.testing.assert_allclose(R, abs(c) ** 2 * np.vdot(u, u).real / 12 * np.outer(v, v.conj()), atol=1e-12)

    def test_triple_loop_oracle(self):
        gen = np.random.default_rng(1)
        Y = gen.standard_normal((16, 16)) + 1j * gen.standard_normal((16, 16))
        Q, M = Y.shape
        R0 = np.zeros((M, M), dtype=complex)
        for i in range(M):
            for j in range(M):
                for q in range(Q):
                    R0[i, j] += Y[q, i] * np.conj(Y[q, j])
        R0 /= Q
        R = segment_autocorrelation(Y)
        assert np.max(np.abs(R - R0)) <= 1e-12 * np.max(np.abs(R0))

    def test_exactly_hermitian(self):
        gen = np.random.default_rng(2)
        R = segment_autocorrelation(gen.standard_normal((20, 7)) + 1j * gen.standard_normal((20, 7)))
        assert np.array_equal(R, R.conj().T)


class TestEigenvalues:
    def test_identity(self):
        assert np.allclose(hermitian_eigvals_desc(np.eye(4)).eigenvalues, 1.0)

    def test_diagonal_sorted(self):
        np.testing.assert_allclose(hermitian_eigvals_desc(np.diag([3.0, 1.0, 2.0])).eigenvalues, [3, 2, 1])

    @pytest.mark.parametrize("seed", range(5))
    def test_trace_and_unitary_invariance(self, seed):
        gen = np.random.default_rng(seed)
        R = _random_psd(8, gen)
        lam = hermitian_eigvals_desc(R).eigenvalues
        assert np.all(np.diff(lam) <= 0)
        assert lam.sum() == pytest.approx(np.trace(R).real, rel=1e-8)
        U = unitary_group.rvs(8, random_state=seed)
        R2 = U.conj().T @ R @ U
        R2 = 0.5 * (R2 + R2.conj().T)
        np.testing.assert_allclose(hermitian_eigvals_desc(R2).eigenvalues, lam, rtol=1e-8, atol=1e-8 * lam[0])

    def test_rejects_non_hermitian(self):
        with pytest.raises(InvalidParameterError):
            hermitian_eigvals_desc(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(InvalidParameterError):
            hermitian_eigvals_desc(np.ones((2, 3)))

    def test_rejects_indefinite(self):
        with pytest.raises(InvalidParameterError):
            hermitian_eigvals_desc(np.diag([1.0, -0.5]))


class TestSpectrum:
    def test_rejects_unsorted(self):
        with pytest.raises(InvalidParameterError):
            SegmentSpectrum(np.array([1.0, 2.0]), 4)

    def test_clamps_rounding_negatives(self):
        spec = SegmentSpectrum(np.array([1.0, -1e-14]), 4)
        assert spec.eigenvalues[-1] == 0.0


class TestMdlScore:
    def test_matches_oracle(self):
        for lam in _spectra(0, 50, 6):
            spec = SegmentSpectrum(lam, 24)
            for d in range(1, 6):
                assert mdl_score(spec, d) == pytest.approx(_mdl_oracle(lam, 24, d), rel=1e-12, abs=1e-12)

    def test_equal_tail_leaves_penalty(self):
        M, Q, d = 6, 32, 2
        spec = SegmentSpectrum(np.array([9.0, 4.0, 1.5, 1.5, 1.5, 1.5]), Q)
        assert mdl_score(spec, d) == pytest.approx(d * (2 * M - d) * math.log(Q) / (2 * Q), abs=1e-12)

    def test_single_spike_prefers_one(self):
        spec = SegmentSpectrum(np.array([10.0, 1.0, 1.0, 1.0]), 16)
        assert mdl_score(spec, 1) < mdl_score(spec, 2)

    def test_score_differences_scale_invariant(self):
        for lam in _spectra(3, 30, 5):
            a, b = SegmentSpectrum(lam, 20), SegmentSpectrum(7.3 * lam, 20)
            for d1, d2 in itertools.combinations(range(1, 5), 2):
                assert mdl_score(a, d1) - mdl_score(a, d2) == pytest.approx(
                    mdl_score(b, d1) - mdl_score(b, d2), abs=1e-9
                )

    @pytest.mark.parametrize("d", [0, 4])
    def test_candidate_range(self, d):
        with pytest.raises(InvalidParameterError):
            mdl_score(SegmentSpectrum(np.array([3.0, 2.0, 1.0, 0.5]), 8), d)


class TestSubspaceDim:
    def test_population_rank_one(self):
        lam = np.array([100.0 + 1.0] + [1.0] * 7)
        assert estimate_subspace_dim(SegmentSpectrum(lam, 10_000)) == 1

    def test_population_rank_two(self):
        # Two unit-power sources with correlation 0.5 and SNR 20 dB.
        P = np.array([[1.0, 0.5], [0.5, 1.0]])
        gen = np.random.default_rng(4)
        A = np.linalg.qr(gen.standard_normal((8, 2)))[0]
        R = A @ P @ A.T + 0.01 * np.eye(8)
        assert estimate_subspace_dim(hermitian_eigvals_desc(R, 10_000)) == 2

    def test_flat_spectrum(self):
        assert estimate_subspace_dim(SegmentSpectrum(np.ones(6), 32)) == 1

    def test_brute_force_m3(self):
        for lam in _spectra(9, 300, 3):
            scores = [_mdl_oracle(lam, 5, d) for d in (1, 2)]
            assert estimate_subspace_dim(SegmentSpectrum(lam, 5)) == 1 + int(np.argmin(scores))

    @given(st.lists(st.floats(1e-3, 1e3), min_size=3, max_size=10), st.floats(1e-3, 1e3))
    @settings(max_examples=200, deadline=None)
    def test_argmin_scale_invariant(self, values, scale):
        lam = np.sort(np.array(values))[::-1]
        Q = 4 * lam.size
        assert estimate_subspace_dim(SegmentSpectrum(lam, Q)) == estimate_subspace_dim(
            SegmentSpectrum(lam * scale, Q)
        )

    def test_too_few_antennas(self):
        with pytest.raises(UnsupportedConfigurationError):
            estimate_subspace_dim(SegmentSpectrum(np.array([2.0, 1.0]), 8))

    def test_too_few_samples(self):
        with pytest.raises(UnsupportedConfigurationError):
            estimate_subspace_dim(SegmentSpectrum(np.array([3.0, 2.0, 1.0, 1.0]), 3))


def _received(attack, coherent=False, noise_var=1e-300, seed=0, M=16, N=64, K=4, phi_max=0.2):
    scn = TrainingScenario(M=M, N=N, K=K, noise_var=noise_var, phi_max=phi_max, attack=attack)
    base = RngStream(seed)
    plan_b = draw_cfo_plan(K, phi_max, base.child(3))
    plan_e = plan_b if coherent else draw_cfo_plan(K, phi_max, base.child(4))
    return synthesize_received(
        scn, gen_qpsk_pilot(N, base.child(0)), plan_b, plan_e if attack else None,
        gen_channel(M, base.child(1)), gen_channel(M, base.child(2)) if attack else None, base.child(5),
    )


class TestDetector:
    @pytest.mark.parametrize("seed", range(5))
    def test_noiseless_h0(self, seed):
        out = detect_attack(_received(False, seed=seed))
        assert np.all(out.dims == 1)
        assert not out.attack_detected

    @pytest.mark.parametrize("seed", range(5))
    def test_coherent_attack_missed(self, seed):
        assert not detect_attack(_received(True, coherent=True, noise_var=1e-4, seed=seed)).attack_detected

    @pytest.mark.parametrize("seed", range(5))
    def test_noiseless_attack_found(self, seed):
        assert detect_attack(_received(True, seed=seed)).attack_detected

    def test_batched_matches_per_segment(self):
        rx = _received(True, noise_var=0.05, seed=7)
        dims = detect_segments(rx.segments).dims
        assert list(dims) == [segment_dimension(Y) for Y in rx.segments]

    def test_shape_check(self):
        with pytest.raises(InvalidParameterError):
            detect_segments(np.zeros((4, 4)))
