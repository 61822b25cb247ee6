"""Tests for the convolutional code, interleaver, and BCJR decoder."""

import numpy as np
import pytest
from scipy.special import logsumexp

from mprx.fec import ConvCodeSpec, Interleaver, LengthMismatchError, bcjr_decode, conv_encode


def shift_register_encode(u, generators=(0o133, 0o171, 0o165), memory=6):
    """Bit-level shift-register oracle, independent of the vectorized encoder."""
    taps = []
    for g in generators:
        taps.append([(g >> (memory - i)) & 1 for i in range(memory + 1)])
    reg = [0] * memory
    out = []
    for bit in list(u) + [0] * memory:
        window = [bit] + reg
        for t in taps:
            out.append(sum(a * b for a, b in zip(t, window)) % 2)
        reg = [bit] + reg[:-1]
    return np.array(out, dtype=np.uint8)


def enumeration_posteriors(priors, spec, n_info):
    """Exhaustive MAP bit posteriors over all 2^n_info codewords."""
    logp0 = -np.logaddexp(0.0, -priors)
    logp1 = -np.logaddexp(0.0, priors)
    scores = np.empty(1 << n_info)
    words = np.empty((1 << n_info, n_info), dtype=np.uint8)
    coded = np.empty((1 << n_info, priors.size), dtype=np.uint8)
    for i in range(1 << n_info):
        u = np.array([(i >> (n_info - 1 - j)) & 1 for j in range(n_info)], dtype=np.uint8)
        words[i] = u
        c = conv_encode(u, spec)
        coded[i] = c
        scores[i] = np.sum(np.where(c == 0, logp0, logp1))
    info_llrs = np.array(
        [logsumexp(scores[words[:, j] == 0]) - logsumexp(scores[words[:, j] == 1]) for j in range(n_info)]
    )
    coded_llrs = np.array(
        [logsumexp(scores[coded[:, j] == 0]) - logsumexp(scores[coded[:, j] == 1]) for j in range(priors.size)]
    )
    return info_llrs, coded_llrs


class TestConvEncode:
    def test_all_zero_input(self):
        for n in (1, 7, 33):
            assert not conv_encode(np.zeros(n, dtype=np.uint8)).any()

    def test_impulse_leading_bits(self):
        u = np.zeros(7, dtype=np.uint8)
        u[0] = 1
        assert conv_encode(u)[:3].tolist() == [1, 1, 1]

    def test_length(self):
        assert conv_encode(np.ones(10, dtype=np.uint8)).size == 3 * (10 + 6)

    def test_matches_shift_register_oracle(self):
        rng = np.random.default_rng(1234)
        u = rng.integers(0, 2, 24).astype(np.uint8)
        assert np.array_equal(conv_encode(u), shift_register_encode(u))

    def test_linearity(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            u1, u2 = rng.integers(0, 2, (2, 17)).astype(np.uint8)
            assert np.array_equal(conv_encode(u1 ^ u2), conv_encode(u1) ^ conv_encode(u2))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            conv_encode(np.array([], dtype=np.uint8))

    def test_non_paper_code_rejected(self):
        with pytest.raises(ValueError):
            ConvCodeSpec(generators_octal=(0o7, 0o5, 0o7), constraint_length=3)


class TestInterleaver:
    def test_identity(self):
        il = Interleaver(np.arange(8))
        x = np.arange(8, dtype=float)
        assert np.array_equal(il.interleave(x), x)

    def test_round_trip(self):
        rng = np.random.default_rng(2)
        il = Interleaver.random(50, rng)
        x = rng.normal(size=50)
        assert np.array_equal(il.deinterleave(il.interleave(x)), x)

    def test_matches_seeded_shuffle_oracle(self):
        il = Interleaver.random(8, np.random.default_rng(7))
        expected = np.random.default_rng(7).permutation(8)
        assert np.array_equal(il.permutation, expected)
        x = np.arange(8)
        assert np.array_equal(il.interleave(x), x[expected])

    def test_length_mismatch(self):
        il = Interleaver.random(8, np.random.default_rng(0))
        with pytest.raises(LengthMismatchError):
            il.interleave(np.zeros(9))

    def test_non_bijection_rejected(self):
        with pytest.raises(ValueError):
            Interleaver(np.array([0, 0, 1]))


class TestBcjr:
    def test_noiseless_codeword_recovery(self):
        rng = np.random.default_rng(3)
        spec = ConvCodeSpec()
        u = rng.integers(0, 2, 40).astype(np.uint8)
        coded = conv_encode(u, spec)
        priors = np.where(coded == 0, 40.0, -40.0)
        _, app = bcjr_decode(priors, spec)
        assert np.array_equal((app < 0).astype(np.uint8), u)

    def test_zero_priors_give_zero_posteriors(self):
        spec = ConvCodeSpec()
        priors = np.zeros(3 * (12 + 6))
        ext, app = bcjr_decode(priors, spec)
        assert np.allclose(app, 0.0, atol=1e-9)
        assert np.allclose(ext, 0.0, atol=1e-9)

    @pytest.mark.parametrize("n_info", [6, 8])
    def test_enumeration_oracle(self, n_info):
        rng = np.random.default_rng(100 + n_info)
        spec = ConvCodeSpec()
        priors = rng.normal(0.0, 1.5, spec.n_coded_bits(n_info))
        ext, app = bcjr_decode(priors, spec)
        ref_info, ref_coded = enumeration_posteriors(priors, spec, n_info)
        assert np.max(np.abs(app - ref_info)) < 1e-9
        # extrinsic consistency: extrinsic + prior equals the coded-bit APP
        assert np.max(np.abs((ext + priors) - ref_coded)) < 1e-9

    def test_outputs_saturated(self):
        spec = ConvCodeSpec()
        u = np.zeros(20, dtype=np.uint8)
        coded = conv_encode(u, spec)
        priors = np.where(coded == 0, 40.0, -40.0)
        ext, app = bcjr_decode(priors, spec)
        assert np.all(np.abs(ext) <= 40.0)
        assert np.all(np.abs(app) <= 40.0)
        assert np.all(np.isfinite(ext))

    def test_bad_length(self):
        with pytest.raises(LengthMismatchError):
            bcjr_decode(np.zeros(20), ConvCodeSpec())
        with pytest.raises(LengthMismatchError):
            bcjr_decode(np.zeros(3 * 6), ConvCodeSpec())
