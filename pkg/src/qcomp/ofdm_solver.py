"""Wideband OFDM joint solver (Q-iCoMP over subcarriers).

Per-subcarrier fixed point with quantization coupling across subcarriers
through the time-domain diagonal, OFDM MMSE combiners, and the wideband
downlink scaling.  The stacked channel is block circulant, so the projected
quantization diagonal is one per-antenna vector shared by all subcarriers.
"""

from dataclasses import dataclass

import numpy as np

from . import quantization, sinr as sinr_mod
from .comp_solver import (
    DEFAULT_MAX_ITER,
    DEFAULT_POWER_CAP,
    DEFAULT_TOL,
    SolveReport,
    _TINY,
)
from .errors import DimensionMismatch, Infeasible, NonPositiveTau, SingularSigma
from .numerics import hermitian_solve, taps_to_freq

FREQ_CONSISTENCY_TOL = 1e-10


@dataclass(frozen=True)
class OfdmProblem:
    """Wideband problem instance: taps, per-subcarrier responses, targets."""

    taps: np.ndarray  # (N_c, N_c, L, N_b, N_u)
    freq: np.ndarray  # (N_c, N_c, K, N_b, N_u)
    gamma: np.ndarray  # (N_c, N_u, K) linear targets
    alpha: float
    n_subcarriers: int
    n_taps: int

    def __post_init__(self):
        n_c = self.taps.shape[0]
        expected = np.stack(
            [
                np.stack(
                    [taps_to_freq(self.taps[i, j], self.n_subcarriers) for j in range(n_c)]
                )
                for i in range(n_c)
            ]
        )
        scale = max(np.abs(expected).max(), 1.0)
        drift = np.abs(expected - self.freq).max()
        if drift > FREQ_CONSISTENCY_TOL * scale:
            raise DimensionMismatch(
                f"frequency responses drift {drift:.3e} from the tap DFT"
            )

    @classmethod
    def from_taps(cls, taps, gamma, alpha, n_subcarriers):
        taps = np.asarray(taps)
        n_c, _, n_taps, n_b, n_u = taps.shape
        freq = np.stack(
            [
                np.stack([taps_to_freq(taps[i, j], n_subcarriers) for j in range(n_c)])
                for i in range(n_c)
            ]
        )
        gamma = np.broadcast_to(
            np.asarray(gamma, dtype=float), (n_c, n_u, n_subcarriers)
        ).copy()
        return cls(
            taps=taps,
            freq=freq,
            gamma=gamma,
            alpha=float(alpha),
            n_subcarriers=n_subcarriers,
            n_taps=n_taps,
        )

    @classmethod
    def from_channels(cls, channels, gamma, alpha):
        sc = channels.scenario
        return cls.from_taps(channels.taps, gamma, alpha, sc.n_subcarriers)

    def stacked_freq(self, i, k):
        """[G_{i,1}(k), ..., G_{i,Nc}(k)] of shape (N_b, N_c*N_u)."""
        n_c, _, _, n_b, n_u = self.freq.shape
        return self.freq[i, :, k].transpose(1, 0, 2).reshape(n_b, n_c * n_u)


def quant_cores(problem, lam):
    """Per-cell per-antenna quantization cores d_i (shape (N_c, N_b))."""
    n_c = problem.freq.shape[0]
    return np.stack(
        [quantization.ofdm_ul_quant_core(problem.freq[i], lam) for i in range(n_c)]
    )


def build_K_bar(problem, lam, cell, subcarrier, core=None):
    """Per-subcarrier system matrix with the cross-subcarrier quantization
    diagonal: I + alpha * G(k) Lambda(k) G(k)^H + (1-alpha) diag(d_cell).

    ``core`` lets a sweep reuse the cached diagonal; it is recomputed from
    all subcarriers' powers otherwise.
    """
    alpha = problem.alpha
    lam = sinr_mod.check_powers(lam, problem.gamma.shape)
    g_k = problem.stacked_freq(cell, subcarrier)
    lam_k = lam[:, :, subcarrier].reshape(-1)
    k_mat = alpha * (g_k * lam_k) @ g_k.conj().T + np.eye(g_k.shape[0])
    if core is None:
        core = quantization.ofdm_ul_quant_core(problem.freq[cell], lam)
    k_mat[np.diag_indices_from(k_mat)] += (1.0 - alpha) * core
    return 0.5 * (k_mat + k_mat.conj().T)


def ofdm_power_update(problem, lam):
    """One Jacobi sweep over every (cell, user, subcarrier)."""
    n_c, n_u, n_k = problem.gamma.shape
    alpha = problem.alpha
    cores = quant_cores(problem, lam)
    new = np.empty_like(lam)
    for i in range(n_c):
        for k in range(n_k):
            k_bar = build_K_bar(problem, lam, i, k, core=cores[i])
            g_own = problem.freq[i, i, k]
            x = hermitian_solve(k_bar, g_own)
            t = np.real(np.sum(g_own.conj() * x, axis=0))
            new[i, :, k] = 1.0 / (alpha * (1.0 + 1.0 / problem.gamma[i, :, k]) * t)
    return new


def ofdm_fixed_point(
    problem,
    init_lambda=None,
    tol=DEFAULT_TOL,
    max_iter=DEFAULT_MAX_ITER,
    power_cap=DEFAULT_POWER_CAP,
):
    """Fixed point of the wideband power update; contracts as narrowband."""
    shape = problem.gamma.shape
    lam = (
        np.zeros(shape)
        if init_lambda is None
        else sinr_mod.check_powers(init_lambda, shape).copy()
    )
    report = SolveReport()
    for it in range(1, max_iter + 1):
        new = ofdm_power_update(problem, lam)
        total = float(new.sum())
        report.per_iteration_total_power.append(total)
        report.iterations = it
        rel = np.abs(new - lam) / np.maximum(lam, _TINY)
        lam = new
        if total > power_cap:
            report.final_total_power = total
            raise Infeasible(
                f"total power {total:.3e} exceeded cap at iteration {it}",
                report=report,
            )
        if rel.max() < tol:
            report.converged = True
            break
    report.final_total_power = float(lam.sum())
    if not report.converged:
        trace = report.per_iteration_total_power
        if len(trace) >= 2 and trace[-1] > trace[-2]:
            raise Infeasible(
                f"no convergence within {max_iter} sweeps and power growing",
                report=report,
            )
        return lam, report
    return lam, report


def ofdm_mmse_combiner(problem, lam):
    """Exact per-(cell, user, subcarrier) MMSE combiners at the given powers."""
    n_c, n_u, n_k = problem.gamma.shape
    n_b = problem.freq.shape[3]
    alpha = problem.alpha
    lam = sinr_mod.check_powers(lam, (n_c, n_u, n_k))
    cores = quant_cores(problem, lam)
    out = np.zeros((n_c, n_u, n_k, n_b), dtype=complex)
    for i in range(n_c):
        for k in range(n_k):
            g_k = problem.stacked_freq(i, k)
            lam_k = lam[:, :, k].reshape(-1)
            c_all = alpha**2 * (g_k * lam_k) @ g_k.conj().T + alpha * np.eye(n_b)
            c_all[np.diag_indices_from(c_all)] += alpha * (1.0 - alpha) * cores[i]
            c_all = 0.5 * (c_all + c_all.conj().T)
            g_own = problem.freq[i, i, k]
            x = hermitian_solve(c_all, g_own)
            t = np.real(np.sum(g_own.conj() * x, axis=0))
            out[i, :, k, :] = (x / (1.0 - alpha**2 * lam[i, :, k] * t)).T
    return out


def ofdm_duality_scaling_matrix(problem, combiners, subcarrier):
    """Per-subcarrier scaling block; quantization corrections sum the
    combiners over every subcarrier (the coupling lives in that average)."""
    g = problem.freq
    alpha = problem.alpha
    n_c, n_u, n_k = problem.gamma.shape
    n = n_c * n_u
    k = subcarrier
    # (1/K) sum_n |f_{j,v}(n)[m]|^2 per (j, v, antenna m).
    f_core = np.mean(np.abs(combiners) ** 2, axis=2)
    sigma = np.zeros((n, n))
    for i in range(n_c):
        for u in range(n_u):
            row = i * n_u + u
            for j in range(n_c):
                guser = g[j, i, k, :, u]
                for v in range(n_u):
                    col = j * n_u + v
                    beam = np.abs(combiners[j, v, k].conj() @ guser) ** 2
                    diag_term = f_core[j, v] @ np.abs(guser) ** 2
                    if row == col:
                        sigma[row, col] = (
                            alpha**2 / problem.gamma[i, u, k] * beam
                            - alpha * (1.0 - alpha) * diag_term
                        )
                    else:
                        sigma[row, col] = (
                            -(alpha**2) * beam - alpha * (1.0 - alpha) * diag_term
                        )
    return sigma


def ofdm_dl_scaling(problem, combiners):
    """Wideband DL precoders w(k) = sqrt(tau(k)) f(k), one scaling solve per
    subcarrier block."""
    from .comp_solver import solve_scaling_system

    n_c, n_u, n_k = problem.gamma.shape
    tau = np.zeros((n_c, n_u, n_k))
    for k in range(n_k):
        sigma = ofdm_duality_scaling_matrix(problem, combiners, k)
        try:
            tau_k = solve_scaling_system(sigma)
        except SingularSigma as e:
            raise SingularSigma(f"subcarrier {k}: {e}") from e
        if np.any(tau_k <= 0):
            raise NonPositiveTau(f"subcarrier {k}: min tau = {tau_k.min():.3e}")
        tau[:, :, k] = tau_k.reshape(n_c, n_u)
    precoders = np.sqrt(tau)[..., None] * combiners
    return tau, precoders


def verify_ofdm_solution(problem, lam, precoders):
    """Audit achieved UL/DL SINRs and the wideband duality gap."""
    alpha = problem.alpha
    combiners = ofdm_mmse_combiner(problem, lam)
    report = SolveReport(converged=True)
    report.final_total_power = float(np.sum(lam))
    report.achieved_sinr = sinr_mod.ofdm_ul_sinr(problem.freq, combiners, lam, alpha)
    report.max_ul_residual = float(
        np.max(np.abs(report.achieved_sinr - problem.gamma) / problem.gamma)
    )
    if precoders is not None:
        report.achieved_dl_sinr = sinr_mod.ofdm_dl_sinr(problem.freq, precoders, alpha)
        report.max_dl_residual = float(
            np.max(np.abs(report.achieved_dl_sinr - problem.gamma) / problem.gamma)
        )
        report.total_dl_power = float(alpha * np.sum(np.abs(precoders) ** 2))
        report.duality_gap = abs(report.final_total_power - report.total_dl_power) / max(
            report.final_total_power, _TINY
        )
    return report


def solve_ofdm_icomp(problem, **kwargs):
    """Full wideband pipeline: fixed point, combiners, DL scaling, audit."""
    lam, report = ofdm_fixed_point(problem, **kwargs)
    combiners = ofdm_mmse_combiner(problem, lam)
    tau, precoders = ofdm_dl_scaling(problem, combiners)
    audit = verify_ofdm_solution(problem, lam, precoders)
    audit.converged = report.converged
    audit.iterations = report.iterations
    audit.per_iteration_total_power = report.per_iteration_total_power
    beams = sinr_mod.BeamformerSet(combiners=combiners, precoders=precoders, tau=tau)
    return lam, beams, audit
