"""Per-cell baseline (Q-Percell): inter-cell interference treated as noise.

Each BS designs combiners from in-cell channels plus a white noise floor
that lumps the measured out-of-cell interference-plus-quantization power,
then balances its users' powers against the full SINR expression with the
other cells' powers frozen.  An outer loop refreshes the frozen state.
Because the combiners never exploit the spatial structure of inter-cell
interference, the converged solution needs at least as much power as the
joint solver and diverges at lower targets.
"""

import numpy as np

from . import sinr as sinr_mod
from .comp_solver import (
    DEFAULT_MAX_ITER,
    DEFAULT_POWER_CAP,
    DEFAULT_TOL,
    SolveReport,
    _TINY,
)
from .errors import Infeasible
from .numerics import hermitian_solve

DEFAULT_MAX_OUTER = 200


def _white_noise_floor(channels, lam, alpha, cell):
    """Per-antenna average of the out-of-cell interference + quantization
    covariance: trace(Phi_i) / N_b = alpha/N_b * sum_{j!=i,v} lam |h|^2."""
    n_c, _, n_b, _ = channels.h.shape
    total = 0.0
    for j in range(n_c):
        if j == cell:
            continue
        total += np.sum(lam[j] * np.sum(np.abs(channels.h[cell, j]) ** 2, axis=0))
    return alpha * total / n_b


def _cell_combiners(channels, lam_cell, nu, alpha, cell):
    """In-cell MMSE combiners with the white out-of-cell noise floor."""
    h_own = channels.h[cell, cell]
    n_b = h_own.shape[0]
    m = (h_own * lam_cell) @ h_own.conj().T
    c = alpha**2 * m + (alpha + nu) * np.eye(n_b)
    c[np.diag_indices_from(c)] += alpha * (1.0 - alpha) * np.real(np.diag(m))
    c = 0.5 * (c + c.conj().T)
    x = hermitian_solve(c, h_own)
    t = np.real(np.sum(h_own.conj() * x, axis=0))
    return (x / (1.0 - alpha**2 * lam_cell * t)).T  # (N_u, N_b)


def _balance_step(channels, combiners_cell, lam_cell, lam_stale, alpha, gamma_cell, cell):
    """Power-balancing update: each user's power is set so the full SINR
    expression meets its target at the current combiner, with out-of-cell
    powers taken from the stale outer state (Jacobi within the cell)."""
    n_c, _, n_b, n_u = channels.h.shape
    h_i = channels.stacked(cell)
    lam_mix = lam_stale.copy()
    lam_mix[cell] = lam_cell
    lam_flat = lam_mix.reshape(-1)
    quant_diag = (np.abs(h_i) ** 2) @ lam_flat + 1.0  # diag(H Lambda H^H + I)
    new = np.empty(n_u)
    for u in range(n_u):
        f = combiners_cell[u]
        gains = np.abs(f.conj() @ h_i) ** 2
        own = cell * n_u + u
        interf = alpha**2 * (lam_flat @ gains - lam_flat[own] * gains[own])
        noise = alpha**2 * np.sum(np.abs(f) ** 2)
        quant = alpha * (1.0 - alpha) * (np.abs(f) ** 2 @ quant_diag)
        new[u] = gamma_cell[u] * (interf + noise + quant) / (alpha**2 * gains[own])
    return new


def percell_solve(
    channels,
    gamma,
    alpha,
    tol=DEFAULT_TOL,
    max_outer=DEFAULT_MAX_OUTER,
    max_inner=DEFAULT_MAX_ITER,
    power_cap=DEFAULT_POWER_CAP,
):
    """Run the per-cell baseline to a stabilized power allocation.

    Returns (powers, BeamformerSet with combiners, SolveReport).  Raises
    Infeasible when powers pass the cap or the outer loop never stabilizes,
    which is the expected behavior at medium-to-high targets.
    """
    n_c, _, n_b, n_u = channels.h.shape
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), (n_c, n_u))
    if np.any(gamma <= 0):
        raise ValueError("targets must be positive")
    lam = np.zeros((n_c, n_u))
    report = SolveReport()
    combiners = np.zeros((n_c, n_u, n_b), dtype=complex)
    for outer in range(1, max_outer + 1):
        stale = lam.copy()
        for i in range(n_c):
            nu = _white_noise_floor(channels, stale, alpha, i)
            lam_cell = stale[i].copy()
            for _ in range(max_inner):
                f_cell = _cell_combiners(channels, lam_cell, nu, alpha, i)
                new = _balance_step(channels, f_cell, lam_cell, stale, alpha, gamma[i], i)
                rel = np.abs(new - lam_cell) / np.maximum(lam_cell, _TINY)
                lam_cell = new
                if lam_cell.sum() > power_cap:
                    report.final_total_power = float(
                        lam.sum() - lam[i].sum() + lam_cell.sum()
                    )
                    report.iterations = outer
                    raise Infeasible(
                        f"cell {i} power exceeded cap in outer round {outer}",
                        report=report,
                    )
                if rel.max() < tol:
                    break
            lam[i] = lam_cell
            combiners[i] = _cell_combiners(channels, lam_cell, nu, alpha, i)
        total = float(lam.sum())
        report.per_iteration_total_power.append(total)
        report.iterations = outer
        if total > power_cap:
            report.final_total_power = total
            raise Infeasible(
                f"total power {total:.3e} exceeded cap in outer round {outer}",
                report=report,
            )
        outer_rel = np.abs(lam - stale) / np.maximum(stale, _TINY)
        if outer_rel.max() < tol:
            report.converged = True
            break
    report.final_total_power = float(lam.sum())
    if not report.converged:
        raise Infeasible(
            f"outer loop did not stabilize within {max_outer} rounds",
            report=report,
        )
    report.achieved_sinr = sinr_mod.ul_sinr(channels, combiners, lam, alpha)
    beams = sinr_mod.BeamformerSet(combiners=combiners)
    return lam, beams, report
