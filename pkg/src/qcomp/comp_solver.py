"""Duality-based joint solver for the narrowband network (Q-iCoMP).

Fixed-point uplink power control, MMSE combiners, downlink precoder scaling
through the duality coefficients, and a read-only audit of any solution.
"""

from dataclasses import dataclass, field

import numpy as np

from . import sinr as sinr_mod
from .errors import Infeasible, NonPositiveTau, SingularSigma
from .numerics import hermitian_solve

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10**4
DEFAULT_POWER_CAP = 1e6
SIGMA_COND_LIMIT = 1e12
_TINY = 1e-300


@dataclass
class SolveReport:
    """Outcome of one solve: convergence trace plus audited quantities."""

    converged: bool = False
    iterations: int = 0
    final_total_power: float = float("nan")
    per_iteration_total_power: list = field(default_factory=list)
    achieved_sinr: np.ndarray | None = None
    achieved_dl_sinr: np.ndarray | None = None
    duality_gap: float | None = None
    total_dl_power: float | None = None
    max_ul_residual: float | None = None
    max_dl_residual: float | None = None


def build_K(channels, lam, alpha, cell):
    """K_i = I + alpha * H_i Lambda H_i^H + (1-alpha) diag(H_i Lambda H_i^H).

    Positive definite by construction (it dominates the identity).
    """
    h_i = channels.stacked(cell)
    lam_flat = sinr_mod.check_powers(lam).reshape(-1)
    m = (h_i * lam_flat) @ h_i.conj().T
    k = alpha * m + np.eye(h_i.shape[0])
    k[np.diag_indices_from(k)] += (1.0 - alpha) * np.real(np.diag(m))
    return 0.5 * (k + k.conj().T)


def power_update(channels, lam, gamma, alpha):
    """One Jacobi sweep of the fixed-point power update over all (cell, user)."""
    n_c, n_u = lam.shape
    new = np.empty_like(lam)
    for i in range(n_c):
        k_i = build_K(channels, lam, alpha, i)
        x = hermitian_solve(k_i, channels.h[i, i])
        t = np.real(np.sum(channels.h[i, i].conj() * x, axis=0))
        new[i] = 1.0 / (alpha * (1.0 + 1.0 / gamma[i]) * t)
    return new


def fixed_point_ul(
    channels,
    gamma,
    alpha,
    init_lambda=None,
    tol=DEFAULT_TOL,
    max_iter=DEFAULT_MAX_ITER,
    power_cap=DEFAULT_POWER_CAP,
):
    """Iterate the power update until the fixed point (optimal UL powers).

    gamma: per-(cell, user) linear SINR targets.  Starts from zero powers by
    default, which makes the iterate sequence monotone.  Raises Infeasible
    when the total power passes ``power_cap`` or the iteration cap is hit
    while the power is still growing.
    """
    n_c, n_u = channels.h.shape[0], channels.h.shape[3]
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), (n_c, n_u))
    if np.any(gamma <= 0):
        raise ValueError("targets must be positive")
    lam = (
        np.zeros((n_c, n_u))
        if init_lambda is None
        else sinr_mod.check_powers(init_lambda, (n_c, n_u)).copy()
    )
    report = SolveReport()
    for it in range(1, max_iter + 1):
        new = power_update(channels, lam, gamma, alpha)
        total = float(new.sum())
        report.per_iteration_total_power.append(total)
        report.iterations = it
        rel = np.abs(new - lam) / np.maximum(lam, _TINY)
        lam = new
        if total > power_cap:
            report.final_total_power = total
            raise Infeasible(
                f"total power {total:.3e} exceeded cap {power_cap:.1e} "
                f"at iteration {it}",
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
                f"no convergence within {max_iter} iterations and total power "
                "still growing",
                report=report,
            )
        return lam, report
    report.achieved_sinr = sinr_mod.mmse_ul_sinr(channels, lam, alpha)
    return lam, report


def mmse_combiner(channels, lam, alpha, cell=None):
    """Exact MMSE combiners at the given powers.

    Returns (N_c, N_u, N_b), or (N_u, N_b) when a single cell is requested.
    """
    n_c, _, n_b, n_u = channels.h.shape
    lam = sinr_mod.check_powers(lam, (n_c, n_u))
    cells = range(n_c) if cell is None else [cell]
    out = np.zeros((n_c, n_u, n_b), dtype=complex)
    for i in cells:
        c_all = sinr_mod.interference_plus_signal_cov(channels, lam, alpha, i)
        x = hermitian_solve(c_all, channels.h[i, i])
        t = np.real(np.sum(channels.h[i, i].conj() * x, axis=0))
        # Rank-one downdate of the all-user covariance recovers the exact
        # per-user MMSE combiner (the direction is shared; only scale moves).
        scale = 1.0 / (1.0 - alpha**2 * lam[i] * t)
        out[i] = (x * scale).T
    return out[cell] if cell is not None else out


def duality_scaling_matrix(channels, combiners, gamma, alpha):
    """Coupling matrix whose solve against all-ones yields the DL scalings."""
    h = channels.h
    n_c, _, _, n_u = h.shape
    n = n_c * n_u
    sigma = np.zeros((n, n))
    for i in range(n_c):
        for u in range(n_u):
            row = i * n_u + u
            for j in range(n_c):
                huser = h[j, i, :, u]
                for v in range(n_u):
                    col = j * n_u + v
                    f = combiners[j, v]
                    beam = np.abs(f.conj() @ huser) ** 2
                    diag_term = np.abs(f) ** 2 @ np.abs(huser) ** 2
                    if row == col:
                        sigma[row, col] = (
                            alpha**2 / gamma[i, u] * beam
                            - alpha * (1.0 - alpha) * diag_term
                        )
                    else:
                        sigma[row, col] = (
                            -(alpha**2) * beam - alpha * (1.0 - alpha) * diag_term
                        )
    return sigma


def solve_scaling_system(sigma):
    """Solve sigma @ tau = 1 after row equilibration.

    Channel gains span many orders of magnitude, so the raw 2-norm condition
    number reflects row scaling rather than near-singularity; the estimate is
    taken on the equilibrated system.
    """
    scale = np.abs(sigma).max(axis=1)
    if np.any(scale <= 0) or not np.all(np.isfinite(scale)):
        raise SingularSigma("scaling system has an empty or non-finite row")
    balanced = sigma / scale[:, None]
    cond = np.linalg.cond(balanced)
    if not np.isfinite(cond) or cond > SIGMA_COND_LIMIT:
        raise SingularSigma(f"equilibrated condition number {cond:.3e}")
    return np.linalg.solve(balanced, 1.0 / scale)


def dl_scaling(channels, combiners, gamma, alpha):
    """Downlink precoders as scaled uplink combiners: w = sqrt(tau) * f.

    The scalings solve the active-constraint system of the downlink problem;
    every resulting DL SINR meets its target when the combiners come from
    the converged uplink fixed point.
    """
    n_c, _, _, n_u = channels.h.shape
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), (n_c, n_u))
    sigma = duality_scaling_matrix(channels, combiners, gamma, alpha)
    tau = solve_scaling_system(sigma).reshape(n_c, n_u)
    if np.any(tau <= 0):
        raise NonPositiveTau(f"min tau = {tau.min():.3e}")
    precoders = np.sqrt(tau)[:, :, None] * combiners
    return tau, precoders


def verify_solution(channels, lam, precoders, gamma, alpha):
    """Read-only audit: achieved SINRs, duality gap, constraint residuals."""
    n_c, _, _, n_u = channels.h.shape
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), (n_c, n_u))
    lam = sinr_mod.check_powers(lam, (n_c, n_u))
    report = SolveReport(converged=True, iterations=0)
    report.final_total_power = float(lam.sum())
    report.achieved_sinr = sinr_mod.mmse_ul_sinr(channels, lam, alpha)
    report.max_ul_residual = float(
        np.max(np.abs(report.achieved_sinr - gamma) / gamma)
    )
    if precoders is not None:
        report.achieved_dl_sinr = sinr_mod.dl_sinr(channels, precoders, alpha)
        report.max_dl_residual = float(
            np.max(np.abs(report.achieved_dl_sinr - gamma) / gamma)
        )
        report.total_dl_power = float(alpha * np.sum(np.abs(precoders) ** 2))
        total_ul = report.final_total_power
        report.duality_gap = abs(total_ul - report.total_dl_power) / max(
            total_ul, _TINY
        )
    return report


def solve_icomp(channels, gamma, alpha, **kwargs):
    """Full pipeline: UL fixed point, combiners, DL scaling, audit."""
    lam, report = fixed_point_ul(channels, gamma, alpha, **kwargs)
    combiners = mmse_combiner(channels, lam, alpha)
    tau, precoders = dl_scaling(channels, combiners, gamma, alpha)
    audit = verify_solution(channels, lam, precoders, gamma, alpha)
    audit.converged = report.converged
    audit.iterations = report.iterations
    audit.per_iteration_total_power = report.per_iteration_total_power
    beams = sinr_mod.BeamformerSet(combiners=combiners, precoders=precoders, tau=tau)
    return lam, beams, audit
