"""Closed-form per-cell solver for homogeneous powers and targets (Q-dCoMP).

Builds the extremal-eigenvalue quantities of the SINR lower bound, solves
the resulting per-cell linear system, and repairs negative powers either by
sign flipping (all negative) or by zeroing cells and re-solving.
"""

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient, SingularSystem
from .numerics import extremal_eigenvalue, hermitian_solve

SYSTEM_COND_LIMIT = 1e12


@dataclass(frozen=True)
class CellEigenQuantities:
    """Eigenvalue bounds per cell pair.

    a[i, j]: cross-cell term (zero on the diagonal); b[i]: in-cell inverse
    Gram bound; c[i, j]: quantization diagonal bound.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray


def eigen_quantities(channels):
    """Compute the A/B/C eigenvalue quantities from a narrowband ChannelSet."""
    h = channels.h
    n_c = h.shape[0]
    a = np.zeros((n_c, n_c))
    b = np.zeros(n_c)
    c = np.zeros((n_c, n_c))
    for i in range(n_c):
        gram = h[i, i].conj().T @ h[i, i]
        try:
            # Rows of the pseudo-inverse H^dagger = (H^H H)^{-1} H^H.
            hd = hermitian_solve(gram, h[i, i].conj().T)
            gram_inv = hermitian_solve(gram, np.eye(gram.shape[0]))
        except Exception as e:
            raise RankDeficient(f"cell {i}: {e}") from e
        b[i] = extremal_eigenvalue(gram_inv, "max")
        for j in range(n_c):
            prod = hd @ h[i, j]
            if j != i:
                a[i, j] = extremal_eigenvalue(prod @ prod.conj().T, "max")
            row_power = np.sum(np.abs(h[i, j]) ** 2, axis=1)  # diag(H H^H)
            scaled = hd * row_power
            c[i, j] = extremal_eigenvalue(scaled @ hd.conj().T, "max")
    return CellEigenQuantities(a=a, b=b, c=c)


def _omega(eq, alpha):
    omega = alpha * eq.a + (1.0 - alpha) * eq.c
    np.fill_diagonal(omega, (1.0 - alpha) * np.diag(eq.c))
    return omega


def _solve_linear(eq, gamma_cells, alpha, active):
    """Solve the per-cell system restricted to the active cell set."""
    idx = np.flatnonzero(active)
    omega = _omega(eq, alpha)[np.ix_(idx, idx)]
    gam = np.diag(gamma_cells[idx])
    sys = np.eye(len(idx)) - (1.0 / alpha) * gam @ omega
    if np.linalg.cond(sys) > SYSTEM_COND_LIMIT:
        raise SingularSystem(f"condition number {np.linalg.cond(sys):.3e}")
    lam_active = (1.0 / alpha) * np.linalg.solve(sys, gam @ eq.b[idx])
    lam = np.zeros(len(active))
    lam[idx] = lam_active
    return lam


def repair_negative(lam_raw, eq, gamma_cells, alpha):
    """Negative-power repair.

    All-negative solutions flip sign; mixed-sign solutions zero the largest
    power (ties to the lowest cell index), drop that cell, and re-solve the
    reduced system until every remaining power is nonnegative.  Returns
    (per-cell powers, list of zeroed cells).
    """
    lam = np.asarray(lam_raw, dtype=float).copy()
    active = np.ones(lam.shape[0], dtype=bool)
    zeroed = []
    while True:
        cur = lam[active]
        if np.all(cur >= 0):
            break
        if np.all(cur < 0):
            lam[active] = np.abs(cur)
            break
        # Largest signed power goes first: a large requirement signals weak
        # channels, and silencing that cell relieves everyone else.
        masked = np.where(active, lam, -np.inf)
        drop = int(np.argmax(masked))
        active[drop] = False
        lam[drop] = 0.0
        zeroed.append(drop)
        if not active.any():
            break
        lam = _solve_linear(eq, gamma_cells, alpha, active)
        lam[~active] = 0.0
    return lam, zeroed


def deterministic_raw(channels, gamma_cells, alpha):
    """Unrepaired solution of the per-cell linear system, plus the eigen
    quantities.  The SINR lower-bound guarantee only applies when this raw
    solution is already all-positive."""
    n_c = channels.h.shape[0]
    gamma_cells = np.broadcast_to(np.asarray(gamma_cells, dtype=float), (n_c,)).copy()
    if np.any(gamma_cells <= 0):
        raise ValueError("targets must be positive")
    eq = eigen_quantities(channels)
    lam_raw = _solve_linear(eq, gamma_cells, alpha, np.ones(n_c, dtype=bool))
    return lam_raw, eq, gamma_cells


def solve_deterministic(channels, gamma_cells, alpha):
    """Per-cell homogeneous UL powers from the SINR lower-bound system.

    gamma_cells: per-cell linear targets.  Returns (per-cell powers,
    zeroed-cell list); broadcast the powers to users for evaluation.
    """
    lam_raw, eq, gamma_cells = deterministic_raw(channels, gamma_cells, alpha)
    return repair_negative(lam_raw, eq, gamma_cells, alpha)


def broadcast_to_users(lam_cells, n_users):
    """Expand per-cell powers to the per-(cell, user) grid."""
    lam_cells = np.asarray(lam_cells, dtype=float)
    return np.repeat(lam_cells[:, None], n_users, axis=1)
