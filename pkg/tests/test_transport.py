import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wkyber.modem import ChannelPlan, NoiseSource, modulate_words
from wkyber.params import Q
from wkyber.transport import (SYMBOLS_PER_COEFF, CoeffErrorDist, CoeffSplit,
                              channel_error_pmf, coeff_error_dist, dist_stddev,
                              merge_coeff, receive_blocks, receive_coeffs,
                              send_blocks, send_coeffs, split_coeff)

NOISELESS = ChannelPlan(math.inf, math.inf)
NOMINAL = ChannelPlan(10.0, -10.0)


def centered_offsets(rx, tx):
    off = (rx - tx) % Q
    off[off > Q // 2] -= Q
    return off


class TestSplit:
    def test_examples(self):
        assert split_coeff(0) == CoeffSplit(0, 0)
        assert split_coeff(3) == CoeffSplit(0, 3)
        assert split_coeff(3328) == CoeffSplit(832, 0)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            split_coeff(4096)
        with pytest.raises(ValueError):
            split_coeff(-1)

    @given(st.integers(0, 4095))
    def test_identity(self, x):
        s = split_coeff(x)
        assert merge_coeff(s) == x
        assert 4 * s.w10 + s.w2 == x


class TestFrames:
    def test_noiseless_roundtrip(self):
        coeffs = np.random.default_rng(0).integers(0, Q, 300)
        frame = send_coeffs(coeffs, NOISELESS, NoiseSource(0))
        rx, failures = receive_coeffs(frame, 300)
        assert (rx == coeffs).all() and failures == 0

    def test_frame_length_contract(self):
        # a rank-3 ciphertext (u then v) is 1024 coefficients = 17408 symbols
        coeffs = np.zeros(1024, dtype=np.int64)
        frame = send_coeffs(coeffs, NOISELESS, NoiseSource(0))
        assert len(frame.msb) + len(frame.lsb) == 1024 * SYMBOLS_PER_COEFF

    def test_deterministic(self):
        coeffs = np.random.default_rng(1).integers(0, Q, 64)
        f1 = send_coeffs(coeffs, NOMINAL, NoiseSource(9))
        f2 = send_coeffs(coeffs, NOMINAL, NoiseSource(9))
        assert np.array_equal(f1.msb, f2.msb) and np.array_equal(f1.lsb, f2.lsb)

    def test_malformed_length_rejected(self):
        coeffs = np.zeros(8, dtype=np.int64)
        frame = send_coeffs(coeffs, NOISELESS, NoiseSource(0))
        with pytest.raises(ValueError):
            receive_coeffs(frame, 9)
        with pytest.raises(ValueError):
            receive_coeffs(frame, 4)

    def test_rejects_coefficients_outside_ring(self):
        with pytest.raises(ValueError):
            send_coeffs(np.array([Q]), NOISELESS, NoiseSource(0))

    def test_offsets_confined_at_nominal_plan(self):
        rng = np.random.default_rng(2)
        coeffs = rng.integers(0, Q, 60_000)
        rx, failures = receive_coeffs(send_coeffs(coeffs, NOMINAL,
                                                  NoiseSource(3)), 60_000)
        assert failures == 0
        off = centered_offsets(rx, coeffs)
        assert off.min() >= -3 and off.max() <= 3

    def test_offset_histogram_matches_analytic(self):
        total = 200_000
        counts = np.zeros(7, dtype=np.int64)
        for part in range(4):
            rng = np.random.default_rng(40 + part)
            coeffs = rng.integers(0, Q, total // 4)
            rx, _ = receive_coeffs(send_coeffs(coeffs, NOMINAL,
                                               NoiseSource(50 + part)),
                                   total // 4)
            off = centered_offsets(rx, coeffs)
            counts += np.bincount(off + 3, minlength=7)
        expected = coeff_error_dist(-10.0).pmf * total
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        assert chi2 < 35  # df = 6, p ~ 1e-5

    def test_block_decode_failures_surface(self):
        # at very low MSB SNR failures must be counted, not raised
        words = np.random.default_rng(4).integers(0, 1024, 2000)
        got, failed = receive_blocks(send_blocks(words, -5.0, NoiseSource(8)),
                                     2000)
        assert failed.any()
        assert len(got) == 2000


class TestErrorPmf:
    def brute_force(self, p):
        """Enumerate the 16 (sent, received) pairs through the real maps."""
        pmf = {e: 0.0 for e in range(-3, 4)}
        for sent in range(4):
            s = modulate_words(np.array([sent]))[0]
            for recv in range(4):
                r = modulate_words(np.array([recv]))[0]
                p_i = p if r.real != s.real else 1.0 - p
                p_q = p if r.imag != s.imag else 1.0 - p
                pmf[recv - sent] += 0.25 * p_i * p_q
        return pmf

    @pytest.mark.parametrize("p", [0.0, 0.01, 0.1, 0.3274, 0.5])
    def test_matches_enumeration(self, p):
        analytic = channel_error_pmf(p).as_dict()
        oracle = self.brute_force(p)
        for e in range(-3, 4):
            assert abs(analytic[e] - oracle[e]) <= 1e-15

    def test_point_mass_at_zero_noise(self):
        d = channel_error_pmf(0.0)
        assert d.as_dict()[0] == 1.0
        assert dist_stddev(d) == 0.0

    def test_sums_to_one_and_symmetric(self):
        for p in (0.0, 0.05, 0.2, 0.3274, 0.5, 1.0):
            for variant in ("exact", "approx"):
                d = channel_error_pmf(p, variant)
                assert abs(d.pmf.sum() - 1.0) <= 1e-12
                assert np.allclose(d.pmf, d.pmf[::-1], atol=1e-15)

    def test_sigma_minus_10(self):
        assert abs(dist_stddev(coeff_error_dist(-10.0)) - 1.28) <= 0.02

    def test_sigma_minus_5_at_least_one(self):
        assert dist_stddev(coeff_error_dist(-5.0)) >= 1.0

    def test_sigma_strictly_decreasing(self):
        sigmas = [dist_stddev(coeff_error_dist(s)) for s in range(-15, 1)]
        assert all(a > b for a, b in zip(sigmas, sigmas[1:]))

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            channel_error_pmf(1.5)
        with pytest.raises(ValueError):
            channel_error_pmf(0.1, "bogus")
        with pytest.raises(ValueError):
            CoeffErrorDist(np.array([0.5, 0, 0, 0, 0, 0, 0.5]) * 1.5)
