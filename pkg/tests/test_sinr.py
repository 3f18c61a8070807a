import numpy as np
import pytest

from qcomp import quantization
from qcomp.comp_solver import mmse_combiner
from qcomp.numerics import taps_to_freq
from qcomp.sinr import (
    dl_sinr,
    interference_plus_signal_cov,
    mmse_ul_sinr,
    ofdm_dl_sinr,
    ofdm_ul_sinr,
    ul_sinr,
)

from oracles import (
    channelset_from_h,
    dense_ofdm_dl_sinr,
    dense_ofdm_ul_sinr,
    random_channelset,
)


def _unit(rng, shape):
    v = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return v / np.linalg.norm(v)


class TestUlSinr:
    def test_single_user_matched_filter(self):
        rng = np.random.default_rng(0)
        ch = random_channelset(rng, 1, 1, 4)
        h = ch.h[0, 0, :, 0]
        f = h[None, None, :]
        out = ul_sinr(ch, f, np.ones((1, 1)), alpha=1.0)
        assert out[0, 0] == pytest.approx(np.linalg.norm(h) ** 2, rel=1e-12)

    def test_alpha_one_drops_quantization(self):
        rng = np.random.default_rng(1)
        ch = random_channelset(rng, 2, 2, 8)
        f = np.stack([[_unit(rng, 8) for _ in range(2)] for _ in range(2)])
        lam = rng.random((2, 2))
        # Rebuild the alpha=1 SINR by hand without any quantization term.
        out = ul_sinr(ch, f, lam, alpha=1.0)
        for i in range(2):
            h_i = ch.stacked(i)
            for u in range(2):
                gains = np.abs(f[i, u].conj() @ h_i) ** 2
                own = i * 2 + u
                lam_flat = lam.reshape(-1)
                expected = (
                    lam_flat[own]
                    * gains[own]
                    / (lam_flat @ gains - lam_flat[own] * gains[own] + np.sum(np.abs(f[i, u]) ** 2))
                )
                assert out[i, u] == pytest.approx(expected, rel=1e-12)

    def test_mmse_combiner_identity(self):
        # At the MMSE combiner the SINR equals alpha^2 lam h^H Cz^{-1} h.
        rng = np.random.default_rng(2)
        ch = random_channelset(rng, 2, 2, 8)
        lam = rng.random((2, 2)) + 0.2
        alpha = quantization.quant_gain(3).alpha
        f = mmse_combiner(ch, lam, alpha)
        direct = ul_sinr(ch, f, lam, alpha)
        for i in range(2):
            c_all = interference_plus_signal_cov(ch, lam, alpha, i)
            for u in range(2):
                h = ch.h[i, i, :, u]
                c_z = c_all - alpha**2 * lam[i, u] * np.outer(h, h.conj())
                quad = alpha**2 * lam[i, u] * np.real(h.conj() @ np.linalg.solve(c_z, h))
                assert direct[i, u] == pytest.approx(quad, rel=1e-9)

    def test_phase_rotation_invariance(self):
        rng = np.random.default_rng(3)
        ch = random_channelset(rng, 2, 2, 8)
        lam = rng.random((2, 2))
        f = np.stack([[_unit(rng, 8) for _ in range(2)] for _ in range(2)])
        base = ul_sinr(ch, f, lam, 0.9)
        rotated = ul_sinr(ch, f * np.exp(1j * 0.7), lam, 0.9)
        np.testing.assert_allclose(base, rotated, rtol=1e-12)

    def test_power_scaling_monotone(self):
        rng = np.random.default_rng(4)
        ch = random_channelset(rng, 2, 2, 8)
        lam = rng.random((2, 2)) + 0.1
        alpha = 0.88
        f = mmse_combiner(ch, lam, alpha)
        base = ul_sinr(ch, f, lam, alpha)
        scaled = ul_sinr(ch, f, 1.5 * lam, alpha)
        assert np.all(scaled > base)
        assert np.all(scaled < 1.5 * base)  # constant noise terms bound the gain

    def test_quantization_always_hurts(self):
        rng = np.random.default_rng(5)
        ch = random_channelset(rng, 2, 2, 8)
        lam = rng.random((2, 2)) + 0.1
        f = np.stack([[_unit(rng, 8) for _ in range(2)] for _ in range(2)])
        values = [
            ul_sinr(ch, f, lam, quantization.quant_gain(b).alpha) for b in (1, 2, 3, 6, None)
        ]
        for worse, better in zip(values, values[1:]):
            assert np.all(worse <= better + 1e-15)


class TestDlSinr:
    def test_single_cell_matched_precoder(self):
        rng = np.random.default_rng(6)
        ch = random_channelset(rng, 1, 1, 4)
        h = ch.h[0, 0, :, 0]
        c = 0.3
        w = (c * h)[None, None, :]
        out = dl_sinr(ch, w, alpha=1.0)
        assert out[0, 0] == pytest.approx(c**2 * np.linalg.norm(h) ** 4, rel=1e-12)

    def test_zero_precoders(self):
        rng = np.random.default_rng(7)
        ch = random_channelset(rng, 2, 2, 8)
        out = dl_sinr(ch, np.zeros((2, 2, 8), dtype=complex), alpha=0.9)
        np.testing.assert_allclose(out, 0.0)

    def test_quantization_term_identity(self):
        # sum_j h^H Cq_j h must match the per-precoder diagonal rewriting.
        rng = np.random.default_rng(8)
        ch = random_channelset(rng, 2, 2, 8)
        w = rng.normal(size=(2, 2, 8)) + 1j * rng.normal(size=(2, 2, 8))
        alpha = quantization.quant_gain(2).alpha
        q = quantization.quant_gain(2)
        for i in range(2):
            for u in range(2):
                lhs = 0.0
                rhs = 0.0
                for j in range(2):
                    huser = ch.h[j, i, :, u]
                    cq = quantization.dl_quant_cov(w[j].T, q)
                    lhs += np.abs(huser) ** 2 @ cq
                    for v in range(2):
                        rhs += (
                            alpha
                            * (1 - alpha)
                            * np.real(
                                w[j, v].conj()
                                @ (np.abs(huser) ** 2 * w[j, v])
                            )
                        )
                assert lhs == pytest.approx(rhs, rel=1e-10)


class TestMmseUlSinr:
    def test_zero_power(self):
        rng = np.random.default_rng(9)
        ch = random_channelset(rng, 2, 2, 8)
        np.testing.assert_allclose(mmse_ul_sinr(ch, np.zeros((2, 2)), 0.9), 0.0)

    def test_error_matrix_identity(self):
        # 1/[E]_{uu} - 1 with the MSE matrix equals the evaluator output.
        rng = np.random.default_rng(10)
        ch = random_channelset(rng, 2, 2, 8)
        lam = rng.random((2, 2)) + 0.3
        alpha = quantization.quant_gain(3).alpha
        got = mmse_ul_sinr(ch, lam, alpha)
        for i in range(2):
            h_i = ch.stacked(i)
            lam_flat = lam.reshape(-1)
            cq = quantization.ul_quant_cov(
                h_i, lam_flat, quantization.quant_gain(3)
            )
            c = alpha**2 * np.eye(8) + np.diag(cq)
            for j in range(2):
                if j != i:
                    hj = ch.h[i, j]
                    c = c + alpha**2 * (hj * lam[j]) @ hj.conj().T
            g = alpha * ch.h[i, i] * np.sqrt(lam[i])
            e = np.linalg.inv(np.eye(2) + g.conj().T @ np.linalg.solve(c, g))
            ref = 1.0 / np.real(np.diag(e)) - 1.0
            np.testing.assert_allclose(got[i], ref, rtol=1e-9)

    def test_mmse_beats_random_combiners(self):
        rng = np.random.default_rng(11)
        ch = random_channelset(rng, 2, 2, 8)
        lam = rng.random((2, 2)) + 0.2
        alpha = 0.9
        best = mmse_ul_sinr(ch, lam, alpha)
        for _ in range(100):
            f = np.stack([[_unit(rng, 8) for _ in range(2)] for _ in range(2)])
            rand = ul_sinr(ch, f, lam, alpha)
            assert np.all(rand <= best * (1 + 1e-12))


def _random_ofdm(rng, n_c=2, n_u=2, n_b=4, n_l=2, n_k=4):
    taps = (
        rng.normal(size=(n_c, n_c, n_l, n_b, n_u))
        + 1j * rng.normal(size=(n_c, n_c, n_l, n_b, n_u))
    ) / np.sqrt(2 * n_l)
    freq = np.stack(
        [
            np.stack([taps_to_freq(taps[i, j], n_k) for j in range(n_c)])
            for i in range(n_c)
        ]
    )
    return taps, freq


class TestOfdmUlSinr:
    def test_flat_uniform_reduces_to_narrowband(self):
        rng = np.random.default_rng(12)
        taps, freq = _random_ofdm(rng, n_l=1)
        ch = channelset_from_h(taps[:, :, 0])
        lam_nb = rng.random((2, 2)) + 0.2
        lam = np.repeat(lam_nb[:, :, None], 4, axis=2)
        alpha = quantization.quant_gain(3).alpha
        f_nb = mmse_combiner(ch, lam_nb, alpha)
        f = np.repeat(f_nb[:, :, None, :], 4, axis=2)
        wide = ofdm_ul_sinr(freq, f, lam, alpha)
        narrow = ul_sinr(ch, f_nb, lam_nb, alpha)
        for k in range(4):
            np.testing.assert_allclose(wide[:, :, k], narrow, rtol=1e-9)

    def test_alpha_one_no_quant(self):
        rng = np.random.default_rng(13)
        taps, freq = _random_ofdm(rng)
        lam = rng.random((2, 2, 4)) + 0.1
        f = rng.normal(size=(2, 2, 4, 4)) + 1j * rng.normal(size=(2, 2, 4, 4))
        got = ofdm_ul_sinr(freq, f, lam, 1.0)
        ref = dense_ofdm_ul_sinr(taps, f, lam, 1.0, 4)
        np.testing.assert_allclose(got, ref, rtol=1e-9)

    def test_dense_stacked_oracle(self):
        rng = np.random.default_rng(14)
        taps, freq = _random_ofdm(rng)
        lam = rng.random((2, 2, 4)) + 0.1
        f = rng.normal(size=(2, 2, 4, 4)) + 1j * rng.normal(size=(2, 2, 4, 4))
        alpha = quantization.quant_gain(2).alpha
        got = ofdm_ul_sinr(freq, f, lam, alpha)
        ref = dense_ofdm_ul_sinr(taps, f, lam, alpha, 4)
        np.testing.assert_allclose(got, ref, rtol=1e-9)


class TestOfdmDlSinr:
    def test_single_subcarrier_reduces_to_narrowband(self):
        rng = np.random.default_rng(15)
        taps, freq = _random_ofdm(rng, n_l=1, n_k=1)
        ch = channelset_from_h(taps[:, :, 0])
        w = rng.normal(size=(2, 2, 1, 4)) + 1j * rng.normal(size=(2, 2, 1, 4))
        alpha = quantization.quant_gain(3).alpha
        wide = ofdm_dl_sinr(freq, w, alpha)
        narrow = dl_sinr(ch, w[:, :, 0, :], alpha)
        np.testing.assert_allclose(wide[:, :, 0], narrow, rtol=1e-10)

    def test_alpha_one_no_quant(self):
        rng = np.random.default_rng(16)
        taps, freq = _random_ofdm(rng)
        w = rng.normal(size=(2, 2, 4, 4)) + 1j * rng.normal(size=(2, 2, 4, 4))
        got = ofdm_dl_sinr(freq, w, 1.0)
        ref = dense_ofdm_dl_sinr(taps, w, 1.0, 4)
        np.testing.assert_allclose(got, ref, rtol=1e-9)

    def test_dense_stacked_oracle(self):
        # Also the Eq-form identity: the evaluator uses the per-precoder
        # rewriting while the oracle materializes the stacked diagonal.
        rng = np.random.default_rng(17)
        taps, freq = _random_ofdm(rng)
        w = rng.normal(size=(2, 2, 4, 4)) + 1j * rng.normal(size=(2, 2, 4, 4))
        alpha = quantization.quant_gain(2).alpha
        got = ofdm_dl_sinr(freq, w, alpha)
        ref = dense_ofdm_dl_sinr(taps, w, alpha, 4)
        np.testing.assert_allclose(got, ref, rtol=1e-9)


def test_sinr_nonnegative_everywhere():
    rng = np.random.default_rng(18)
    ch = random_channelset(rng, 2, 2, 8)
    lam = rng.random((2, 2))
    f = rng.normal(size=(2, 2, 8)) + 1j * rng.normal(size=(2, 2, 8))
    assert np.all(ul_sinr(ch, f, lam, 0.8) >= 0)
    assert np.all(dl_sinr(ch, f, 0.8) >= 0)
    assert np.all(mmse_ul_sinr(ch, lam, 0.8) >= 0)
