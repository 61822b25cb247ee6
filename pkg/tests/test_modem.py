"""Tests for constellations, symbol pmfs, and the symbol-belief grid."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mprx.frame import build_pilot_pattern
from mprx.modem import (
    Constellation,
    DegenerateVarianceError,
    SymbolBeliefGrid,
    combine_symbol_belief,
    extrinsic_symbol_pmf,
    gaussian_bit_llrs,
    hard_decisions,
    map_bits,
    pmf_moments,
    uniform_pmf,
)

QPSK = Constellation.get("qpsk")
QAM16 = Constellation.get("16qam")


class TestConstellation:
    @pytest.mark.parametrize("c", [QPSK, QAM16], ids=["qpsk", "16qam"])
    def test_unit_average_energy(self, c):
        assert np.mean(np.abs(c.points) ** 2) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("c", [QPSK, QAM16], ids=["qpsk", "16qam"])
    def test_gray_adjacency(self, c):
        # geometric nearest neighbors differ in exactly one labeling bit
        bits = c.label_bits()
        for i, p in enumerate(c.points):
            d = np.abs(c.points - p)
            d[i] = np.inf
            for j in np.flatnonzero(np.isclose(d, d.min())):
                assert np.sum(bits[i] != bits[j]) == 1

    def test_qpsk_anchor(self):
        assert map_bits([0, 0], QPSK)[0] == pytest.approx((1 + 1j) / np.sqrt(2))

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError):
            Constellation.get("8psk")


class TestMapBits:
    @pytest.mark.parametrize("c", [QPSK, QAM16], ids=["qpsk", "16qam"])
    def test_round_trip(self, c):
        rng = np.random.default_rng(0)
        bits = rng.integers(0, 2, 60 * c.bits_per_symbol).astype(np.uint8)
        assert np.array_equal(hard_decisions(map_bits(bits, c), c), bits)

    def test_length_check(self):
        with pytest.raises(ValueError):
            map_bits([0, 1, 0], QPSK)

    def test_qam16_mean_power(self):
        labels = np.arange(16)
        bits = ((labels[:, None] >> np.arange(3, -1, -1)) & 1).reshape(-1)
        syms = map_bits(bits, QAM16)
        assert np.mean(np.abs(syms) ** 2) == pytest.approx(1.0)


class TestExtrinsicSymbolPmf:
    def test_zero_llrs_uniform(self):
        pmf = extrinsic_symbol_pmf(np.zeros(2), QPSK)
        assert np.allclose(pmf, 0.25)

    def test_certain_bits_point_mass(self):
        pmf = extrinsic_symbol_pmf(np.full(4, 40.0), QAM16)
        assert pmf[0] == pytest.approx(1.0, abs=1e-12)

    def test_hand_product(self):
        # LLRs (ln 3, -ln 3): P(b0=0)=0.75, P(b1=0)=0.25; lexicographic labels
        pmf = extrinsic_symbol_pmf(np.array([np.log(3.0), -np.log(3.0)]), QPSK)
        expected = np.array([0.75 * 0.25, 0.75 * 0.75, 0.25 * 0.25, 0.25 * 0.75])
        assert np.allclose(pmf, expected, atol=1e-12)

    def test_product_measure_16qam(self):
        rng = np.random.default_rng(4)
        llrs = rng.normal(0, 2, 4)
        pmf = extrinsic_symbol_pmf(llrs, QAM16)
        p0 = 1.0 / (1.0 + np.exp(-llrs))
        bits = QAM16.label_bits()
        expected = np.prod(np.where(bits == 0, p0, 1.0 - p0), axis=1)
        expected /= expected.sum()
        assert np.allclose(pmf, expected, atol=1e-12)

    def test_batch_shape(self):
        rng = np.random.default_rng(5)
        pmf = extrinsic_symbol_pmf(rng.normal(size=(7, 2)), QPSK)
        assert pmf.shape == (7, 4)
        assert np.allclose(pmf.sum(axis=1), 1.0)


class TestCombineSymbolBelief:
    def test_uninformative_gaussian(self):
        rng = np.random.default_rng(6)
        beta = extrinsic_symbol_pmf(rng.normal(size=2), QPSK)
        out = combine_symbol_belief(beta, 0.7 + 0.2j, 1e12, QPSK)
        assert np.allclose(out, beta, atol=1e-9)

    def test_vanishing_variance(self):
        s0 = QPSK.points[2]
        out = combine_symbol_belief(np.full(4, 0.25), s0, 1e-12, QPSK)
        assert out[2] == pytest.approx(1.0)

    def test_direct_formula(self):
        x, s2 = 0.3 + 0.1j, 0.5
        out = combine_symbol_belief(np.full(4, 0.25), x, s2, QPSK)
        w = 0.25 * np.exp(-np.abs(QPSK.points - x) ** 2 / s2)
        assert np.allclose(out, w / w.sum(), atol=1e-12)

    def test_order_independent(self):
        # multiplying beta then evidence == evidence then beta (pointwise product)
        rng = np.random.default_rng(7)
        beta = extrinsic_symbol_pmf(rng.normal(size=2), QPSK)
        x, s2 = 0.2 - 0.4j, 0.8
        a = combine_symbol_belief(beta, x, s2, QPSK)
        flat = np.full(4, 0.25)
        evidence_first = combine_symbol_belief(flat, x, s2, QPSK)
        b = evidence_first * beta
        b /= b.sum()
        assert np.allclose(a, b, atol=1e-12)

    def test_nonpositive_variance_rejected(self):
        with pytest.raises(DegenerateVarianceError):
            combine_symbol_belief(np.full(4, 0.25), 0.0, 0.0, QPSK)


class TestPmfMoments:
    def test_point_mass(self):
        pmf = np.zeros(4)
        pmf[1] = 1.0
        mean, var = pmf_moments(pmf, QPSK)
        assert mean == pytest.approx(QPSK.points[1])
        assert var == pytest.approx(0.0, abs=1e-15)

    def test_uniform_qpsk(self):
        mean, var = pmf_moments(np.full(4, 0.25), QPSK)
        assert abs(mean) < 1e-15
        assert var == pytest.approx(1.0)

    def test_direct_sum(self):
        pmf = np.array([0.7, 0.1, 0.1, 0.1])
        mean, var = pmf_moments(pmf, QPSK)
        ref_mean = np.sum(pmf * QPSK.points)
        ref_var = np.sum(pmf * np.abs(QPSK.points) ** 2) - abs(ref_mean) ** 2
        assert mean == pytest.approx(ref_mean)
        assert var == pytest.approx(ref_var)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(1e-6, 1.0), min_size=16, max_size=16))
    def test_variance_bounds(self, weights):
        pmf = np.array(weights)
        pmf /= pmf.sum()
        _, var = pmf_moments(pmf, QAM16)
        assert 0.0 <= var <= np.max(np.abs(QAM16.points) ** 2) + 1e-12


class TestGaussianBitLlrs:
    @pytest.mark.parametrize("c", [QPSK, QAM16], ids=["qpsk", "16qam"])
    def test_noiseless_recovery(self, c):
        rng = np.random.default_rng(8)
        bits = rng.integers(0, 2, 30 * c.bits_per_symbol).astype(np.uint8)
        syms = map_bits(bits, c)
        llrs = gaussian_bit_llrs(syms, np.full(syms.size, 1e-6), c)
        assert np.array_equal((llrs.reshape(-1) < 0).astype(np.uint8), bits)

    def test_symmetric_zero(self):
        llrs = gaussian_bit_llrs(np.array([0.0 + 0.0j]), np.array([2.0]), QPSK)
        assert np.allclose(llrs, 0.0, atol=1e-12)

    def test_priors_shift_llrs(self):
        # a strong prior on the Q-axis bits pulls the I-axis decision for 16QAM
        x = np.array([QAM16.points[0b0101]])
        var = np.array([0.5])
        no_prior = gaussian_bit_llrs(x, var, QAM16)
        priors = np.array([[0.0, 0.0, 40.0, -40.0]])
        with_prior = gaussian_bit_llrs(x, var, QAM16, bit_priors=priors)
        assert with_prior.shape == no_prior.shape
        assert not np.allclose(no_prior, with_prior)


class TestSymbolBeliefGrid:
    def test_pilot_entries_degenerate(self):
        pat = build_pilot_pattern(75, 7, np.random.default_rng(0))
        grid = SymbolBeliefGrid.from_pilots(pat, 7, 75)
        for i, (k, l) in enumerate(pat.positions):
            assert grid.means[0, l, k] == pat.values[0, i]
            assert grid.variances[:, l, k].max() == 0.0

    def test_data_moment_round_trip(self):
        pat = build_pilot_pattern(75, 7, np.random.default_rng(1))
        grid = SymbolBeliefGrid.from_pilots(pat, 7, 75)
        rng = np.random.default_rng(2)
        mean = rng.normal(size=512) + 1j * rng.normal(size=512)
        var = rng.uniform(0, 1, 512)
        grid.set_data_moments(1, mean, var)
        got_mean, got_var = grid.data_moments(1)
        assert np.allclose(got_mean, mean)
        assert np.allclose(got_var, var)
        # pilots untouched
        for i, (k, l) in enumerate(pat.positions):
            assert grid.means[1, l, k] == pat.values[1, i]

    def test_negative_variance_rejected(self):
        with pytest.raises(ValueError):
            SymbolBeliefGrid(np.zeros((1, 2, 2)), -np.ones((1, 2, 2)), np.zeros((2, 2), dtype=bool))

    def test_uniform_pmf_helper(self):
        pmf = uniform_pmf((3,), QPSK)
        assert pmf.shape == (3, 4)
        assert np.allclose(pmf, 0.25)
