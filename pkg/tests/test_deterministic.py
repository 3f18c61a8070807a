import numpy as np
import pytest

from qcomp import quantization
from qcomp.deterministic import (
    CellEigenQuantities,
    broadcast_to_users,
    deterministic_raw,
    eigen_quantities,
    repair_negative,
    solve_deterministic,
    _solve_linear,
)
from qcomp.network import Scenario, draw_channels
from qcomp.sinr import mmse_ul_sinr

from oracles import channelset_from_h, char_poly_eigs


def _identity_channels(n_cells=2, n=2, cross=0.0):
    h = np.zeros((n_cells, n_cells, n, n), dtype=complex)
    for i in range(n_cells):
        for j in range(n_cells):
            h[i, j] = np.eye(n) if i == j else cross * np.eye(n)
    return channelset_from_h(h)


class TestEigenQuantities:
    def test_identity_in_cell(self):
        ch = _identity_channels()
        eq = eigen_quantities(ch)
        np.testing.assert_allclose(eq.b, 1.0, rtol=1e-12)

    def test_zero_cross_channels(self):
        ch = _identity_channels(cross=0.0)
        eq = eigen_quantities(ch)
        assert eq.a[0, 1] == pytest.approx(0.0, abs=1e-14)
        assert eq.c[0, 1] == pytest.approx(0.0, abs=1e-14)

    def test_against_char_poly_oracle(self):
        rng = np.random.default_rng(0)
        h = rng.normal(size=(2, 2, 8, 2)) + 1j * rng.normal(size=(2, 2, 8, 2))
        ch = channelset_from_h(h)
        eq = eigen_quantities(ch)
        for i in range(2):
            own = h[i, i]
            gram = own.conj().T @ own
            hd = np.linalg.solve(gram, own.conj().T)
            assert eq.b[i] == pytest.approx(
                char_poly_eigs(np.linalg.inv(gram))[-1], rel=1e-8
            )
            for j in range(2):
                if j != i:
                    m = hd @ h[i, j]
                    assert eq.a[i, j] == pytest.approx(
                        char_poly_eigs(m @ m.conj().T)[-1], rel=1e-8
                    )
                d = np.diag(np.sum(np.abs(h[i, j]) ** 2, axis=1))
                ref = char_poly_eigs(hd @ d @ hd.conj().T)[-1]
                assert eq.c[i, j] == pytest.approx(ref, rel=1e-8)


class TestSolveDeterministic:
    def test_single_cell_unquantized(self):
        rng = np.random.default_rng(1)
        h = rng.normal(size=(1, 1, 8, 2)) + 1j * rng.normal(size=(1, 1, 8, 2))
        ch = channelset_from_h(h)
        gamma = 1.4
        lam, zeroed = solve_deterministic(ch, gamma, 1.0)
        eq = eigen_quantities(ch)
        assert zeroed == []
        assert lam[0] == pytest.approx(gamma * eq.b[0], rel=1e-10)

    def test_decoupled_cells_unquantized(self):
        rng = np.random.default_rng(2)
        h = np.zeros((2, 2, 8, 2), dtype=complex)
        for i in range(2):
            h[i, i] = rng.normal(size=(8, 2)) + 1j * rng.normal(size=(8, 2))
        ch = channelset_from_h(h)
        gammas = np.array([0.8, 2.1])
        lam, _ = solve_deterministic(ch, gammas, 1.0)
        eq = eigen_quantities(ch)
        np.testing.assert_allclose(lam, gammas * eq.b, rtol=1e-10)

    def test_lower_bound_against_exact_evaluator(self):
        # The guarantee holds only when the raw solve needs no repair; the
        # all-negative sign flip is an explicit heuristic outside the bound.
        alpha = quantization.quant_gain(3).alpha
        checked = 0
        for seed in range(40):
            sc = Scenario(
                n_cells=2, n_users_per_cell=2, n_bs_antennas=8, adc_dac_bits=3, seed=seed
            )
            ch = draw_channels(sc)
            gamma = 1.0
            lam_raw, _, _ = deterministic_raw(ch, gamma, alpha)
            if np.any(lam_raw <= 0):
                continue
            lam, zeroed = solve_deterministic(ch, gamma, alpha)
            assert zeroed == []
            np.testing.assert_allclose(lam, lam_raw)
            checked += 1
            per_user = mmse_ul_sinr(ch, broadcast_to_users(lam, 2), alpha)
            assert per_user.min(axis=1).min() >= gamma - 1e-9
        assert checked >= 20

    def test_monotone_in_targets_when_system_is_monotone(self):
        alpha = quantization.quant_gain(3).alpha
        checked = 0
        for seed in range(20):
            sc = Scenario(
                n_cells=2, n_users_per_cell=2, n_bs_antennas=8, adc_dac_bits=3, seed=seed
            )
            ch = draw_channels(sc)
            eq = eigen_quantities(ch)
            lam1 = _solve_linear(eq, np.array([1.0, 1.0]), alpha, np.ones(2, bool))
            lam2 = _solve_linear(eq, np.array([1.2, 1.2]), alpha, np.ones(2, bool))
            omega = alpha * eq.a + (1 - alpha) * eq.c
            np.fill_diagonal(omega, (1 - alpha) * np.diag(eq.c))
            sys = np.eye(2) - (1.0 / alpha) * np.diag([1.2, 1.2]) @ omega
            if np.any(np.linalg.inv(sys) < 0):
                continue  # not an M-matrix; the spec skips these
            checked += 1
            assert np.all(lam2 >= lam1 - 1e-12)
        assert checked >= 5


class TestRepairNegative:
    def _toy_eq(self):
        a = np.array([[0.0, 0.3], [0.2, 0.0]])
        b = np.array([0.5, 0.7])
        c = np.array([[0.1, 0.05], [0.04, 0.08]])
        return CellEigenQuantities(a=a, b=b, c=c)

    def test_all_negative_takes_absolute_value(self):
        eq = self._toy_eq()
        lam, zeroed = repair_negative(np.array([-2.0, -3.0]), eq, np.ones(2), 0.9)
        np.testing.assert_allclose(lam, [2.0, 3.0])
        assert zeroed == []

    def test_mixed_signs_zeroes_largest_and_resolves(self):
        eq = self._toy_eq()
        alpha, gamma = 1.0, np.ones(2)
        lam, zeroed = repair_negative(np.array([5.0, -1.0]), eq, gamma, alpha)
        assert zeroed == [0]
        assert lam[0] == 0.0
        # Reduced 1x1 system: with alpha=1 the diagonal omega vanishes.
        assert lam[1] == pytest.approx(eq.b[1], rel=1e-12)

    def test_nonnegative_input_unchanged(self):
        eq = self._toy_eq()
        lam, zeroed = repair_negative(np.array([0.4, 1.1]), eq, np.ones(2), 0.9)
        np.testing.assert_allclose(lam, [0.4, 1.1])
        assert zeroed == []

    def test_tie_breaks_to_lowest_cell_index(self):
        a = np.zeros((3, 3))
        b = np.array([1.0, 1.0, 1.0])
        c = np.zeros((3, 3))
        eq = CellEigenQuantities(a=a, b=b, c=c)
        lam, zeroed = repair_negative(np.array([2.0, 2.0, -1.0]), eq, np.ones(3), 1.0)
        assert zeroed[0] == 0

    def test_terminates_within_cell_count(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = 4
            eq = CellEigenQuantities(
                a=rng.random((n, n)), b=rng.random(n) + 0.1, c=rng.random((n, n))
            )
            raw = rng.normal(size=n)
            lam, zeroed = repair_negative(raw, eq, np.ones(n), 0.8)
            assert len(zeroed) <= n
            assert np.all(lam >= 0)


def test_broadcast_homogeneous_powers():
    lam = broadcast_to_users(np.array([1.5, 2.5]), 3)
    assert lam.shape == (2, 3)
    np.testing.assert_allclose(lam[0], 1.5)
    np.testing.assert_allclose(lam[1], 2.5)
