import math

import numpy as np
import pytest

from qcomp.errors import InvalidBits, NegativePower
from qcomp.quantization import (
    BETA_TABLE,
    QuantConfig,
    dl_quant_cov,
    lloyd_max_mse,
    ofdm_dl_quant_cov_diag,
    ofdm_ul_quant_cov_diag,
    quant_gain,
    ul_quant_cov,
)

from oracles import monte_carlo_ul_quant_cov, stacked_dl_quant_diag, stacked_ul_quant_diag


class TestQuantGain:
    def test_infinite_resolution(self):
        for bits in (None, math.inf):
            q = quant_gain(bits)
            assert q.alpha == 1.0 and q.beta == 0.0

    def test_high_resolution_formula(self):
        q = quant_gain(6)
        assert q.beta == pytest.approx((math.pi * math.sqrt(3) / 2) * 2**-12, rel=1e-12)
        assert q.beta == pytest.approx(6.642e-4, rel=1e-3)

    def test_invalid(self):
        for bad in (0, -1, 2.5):
            with pytest.raises(InvalidBits):
                quant_gain(bad)

    def test_alpha_strictly_increasing(self):
        alphas = [quant_gain(b).alpha for b in range(1, 9)]
        assert all(a2 > a1 for a1, a2 in zip(alphas, alphas[1:]))

    def test_config_invariant(self):
        with pytest.raises(ValueError):
            QuantConfig(bits=3, alpha=0.9, beta=0.2)


class TestLloydMaxOracle:
    def test_one_bit_closed_form(self):
        # sign * E|x| codebook gives distortion 1 - 2/pi.
        mse = lloyd_max_mse(1, sample_count=10**6, seed=1)
        assert mse == pytest.approx(1.0 - 2.0 / math.pi, rel=5e-3)

    def test_fine_quantization_limit(self):
        assert lloyd_max_mse(8, sample_count=10**5, seed=2) < 1e-4

    def test_table_self_consistency(self):
        for bits, beta in BETA_TABLE.items():
            mse = lloyd_max_mse(bits, sample_count=10**6, seed=100 + bits)
            assert mse == pytest.approx(beta, rel=0.01), f"bits={bits}"


class TestUlQuantCov:
    def test_no_quantization(self):
        h = np.ones((3, 2), dtype=complex)
        out = ul_quant_cov(h, np.ones(2), quant_gain(None))
        np.testing.assert_allclose(out, 0.0)

    def test_noise_only(self):
        q = quant_gain(2)
        out = ul_quant_cov(np.ones((4, 2), dtype=complex), np.zeros(2), q)
        np.testing.assert_allclose(out, q.alpha * (1 - q.alpha))

    def test_negative_power(self):
        with pytest.raises(NegativePower):
            ul_quant_cov(np.ones((2, 1), dtype=complex), np.array([-1.0]), quant_gain(3))

    def test_linear_scaling_in_power(self):
        rng = np.random.default_rng(8)
        h = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
        lam = rng.random(3)
        q = quant_gain(2)
        base = ul_quant_cov(h, lam, q)
        doubled = ul_quant_cov(h, 2 * lam, q)
        signal_part = q.alpha * (1 - q.alpha) * ((np.abs(h) ** 2) @ lam)
        np.testing.assert_allclose(doubled - base, signal_part, rtol=1e-12)

    @pytest.mark.slow
    def test_monte_carlo_quantizer_oracle(self):
        rng = np.random.default_rng(77)
        h = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
        lam = np.array([0.8, 1.7])
        q = quant_gain(3)
        predicted = ul_quant_cov(h, lam, q)
        sampled = monte_carlo_ul_quant_cov(h, lam, bits=3, n_draws=10**6, seed=5)
        assert np.all(np.abs(sampled - predicted) / predicted <= 0.03)


class TestDlQuantCov:
    def test_zero_precoder(self):
        np.testing.assert_allclose(
            dl_quant_cov(np.zeros((3, 2), dtype=complex), quant_gain(2)), 0.0
        )

    def test_no_quantization(self):
        np.testing.assert_allclose(
            dl_quant_cov(np.ones((3, 2), dtype=complex), quant_gain(None)), 0.0
        )

    def test_single_column(self):
        q = quant_gain(3)
        w = np.array([[1.0], [2.0j]])
        out = dl_quant_cov(w, q)
        np.testing.assert_allclose(out, q.alpha * (1 - q.alpha) * np.array([1.0, 4.0]))


class TestOfdmUlQuantCovDiag:
    def _random_taps(self, rng, n_cells=2, n_l=2, n_b=3, n_u=2):
        return rng.normal(size=(n_cells, n_l, n_b, n_u)) + 1j * rng.normal(
            size=(n_cells, n_l, n_b, n_u)
        )

    def test_no_quantization(self):
        rng = np.random.default_rng(3)
        taps = self._random_taps(rng)
        lam = rng.random((2, 2, 4))
        out = ofdm_ul_quant_cov_diag(taps, lam, quant_gain(None), 4)
        np.testing.assert_allclose(out, 0.0)

    def test_flat_uniform_reduces_to_narrowband(self):
        rng = np.random.default_rng(4)
        taps = self._random_taps(rng, n_l=1)
        q = quant_gain(3)
        lam_nb = rng.random((2, 2))
        lam = np.repeat(lam_nb[:, :, None], 4, axis=2)
        out = ofdm_ul_quant_cov_diag(taps, lam, q, 4)
        h_stacked = taps[:, 0].transpose(1, 0, 2).reshape(3, 4)
        ref = ul_quant_cov(h_stacked, lam_nb.reshape(-1), q)
        for k in range(4):
            np.testing.assert_allclose(out[3 * k : 3 * (k + 1)], ref, rtol=1e-12)

    def test_dense_materialization_oracle(self):
        rng = np.random.default_rng(5)
        taps = self._random_taps(rng, n_l=2)
        lam = rng.random((2, 2, 4))
        q = quant_gain(2)
        out = ofdm_ul_quant_cov_diag(taps, lam, q, 4)
        ref = q.alpha * (1 - q.alpha) * stacked_ul_quant_diag(taps, lam, 4)
        assert np.abs(out - ref).max() <= 1e-10 * max(1.0, ref.max())


class TestOfdmDlQuantCovDiag:
    def test_zero_precoders(self):
        out = ofdm_dl_quant_cov_diag(np.zeros((4, 3, 2), dtype=complex), quant_gain(2), 4)
        np.testing.assert_allclose(out, 0.0)

    def test_single_subcarrier_degenerate(self):
        rng = np.random.default_rng(6)
        w = rng.normal(size=(1, 3, 2)) + 1j * rng.normal(size=(1, 3, 2))
        q = quant_gain(3)
        out = ofdm_dl_quant_cov_diag(w, q, 1)
        np.testing.assert_allclose(out, dl_quant_cov(w[0], q), rtol=1e-12)

    def test_dense_materialization_oracle(self):
        rng = np.random.default_rng(7)
        w = rng.normal(size=(4, 3, 2)) + 1j * rng.normal(size=(4, 3, 2))
        q = quant_gain(2)
        out = ofdm_dl_quant_cov_diag(w, q, 4)
        ref = q.alpha * (1 - q.alpha) * stacked_dl_quant_diag(w, 4)
        assert np.abs(out - ref).max() <= 1e-10 * max(1.0, ref.max())


def test_covariances_always_nonnegative():
    rng = np.random.default_rng(10)
    q = quant_gain(1)
    for _ in range(20):
        h = rng.normal(size=(4, 6)) + 1j * rng.normal(size=(4, 6))
        assert np.all(ul_quant_cov(h, rng.random(6), q) >= 0)
        assert np.all(dl_quant_cov(h[:, :3], q) >= 0)
