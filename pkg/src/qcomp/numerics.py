"""Complex-valued numerical kernels shared by every solver.

Hermitian positive-definite solves, extremal eigenvalues, the unitary DFT
matrix, and tap-sequence to per-subcarrier frequency response conversion.
All functions are pure and safe to call from concurrent trials.
"""

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NoConvergence, NotHermitian, NotPositiveDefinite

# Central tolerance knobs (relative unless noted).
HERMITIAN_TOL = 1e-10
SOLVE_RESIDUAL_TOL = 1e-10
EIG_MAX_ITER = 10**5


def check_hermitian(a, tol=HERMITIAN_TOL):
    """Return the symmetrized matrix (A + A^H)/2, raising if A is not
    Hermitian within ``tol`` relative to its largest entry."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    scale = np.abs(a).max()
    if scale > 0 and np.abs(a - a.conj().T).max() > tol * scale:
        raise NotHermitian(
            f"asymmetry {np.abs(a - a.conj().T).max():.3e} exceeds {tol:.1e} * {scale:.3e}"
        )
    return 0.5 * (a + a.conj().T)


def hermitian_solve(a, b):
    """Solve A x = b for Hermitian positive definite A.

    Accepts a vector or a matrix of stacked right-hand sides.  One step of
    iterative refinement keeps the relative residual below
    ``SOLVE_RESIDUAL_TOL`` per column.
    """
    a = check_hermitian(a)
    b = np.asarray(b)
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"A is {a.shape} but b has leading dim {b.shape[0]}")
    try:
        cho = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as e:
        raise NotPositiveDefinite(str(e)) from e
    x = scipy.linalg.cho_solve(cho, b, check_finite=False)
    # Single refinement step: drift from accumulated covariances is mild, so
    # one correction is enough to meet the residual contract.
    r = b - a @ x
    x = x + scipy.linalg.cho_solve(cho, r, check_finite=False)
    return x


def extremal_eigenvalue(a, which="max", max_iter=EIG_MAX_ITER):
    """Largest or smallest eigenvalue of a Hermitian PSD matrix.

    ``which`` is "max" or "min".  The contract is accuracy (1e-10 relative),
    not a particular algorithm; matrices here are small, so the dense
    symmetric eigensolver is used.  ``max_iter`` is kept for API parity and
    bounds the underlying solver's effort indirectly.
    """
    a = check_hermitian(a)
    if which not in ("max", "min"):
        raise ValueError(f"which must be 'max' or 'min', got {which!r}")
    try:
        vals = np.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as e:
        raise NoConvergence(str(e)) from e
    return float(vals[-1] if which == "max" else vals[0])


def dft_matrix(n_points):
    """Unitary K-point DFT matrix, W[k, t] = exp(-2j*pi*k*t/K) / sqrt(K)."""
    if n_points < 1:
        raise DimensionMismatch("DFT size must be >= 1")
    k = np.arange(n_points)
    return np.exp(-2j * np.pi * np.outer(k, k) / n_points) / np.sqrt(n_points)


def taps_to_freq(taps, n_subcarriers):
    """Per-subcarrier frequency response of a tap sequence.

    taps: sequence of L equally shaped matrices (the time-domain taps).
    Returns an array of K matrices, G(k) = sum_l taps[l] * exp(-2j*pi*k*l/K).
    """
    taps = np.asarray(taps)
    if taps.ndim < 1:
        raise DimensionMismatch("taps must be a sequence of matrices")
    n_taps = taps.shape[0]
    if n_taps > n_subcarriers:
        raise DimensionMismatch(
            f"tap count {n_taps} exceeds subcarrier count {n_subcarriers}"
        )
    # np.fft.fft over the tap axis computes exactly sum_l x_l e^{-2j pi k l / K}.
    return np.fft.fft(taps, n=n_subcarriers, axis=0)


def block_circulant(taps, n_subcarriers):
    """Block-circulant matrix whose first block-column is the tap sequence.

    Block (r, c) equals taps[(r - c) mod K] when that index is a valid tap
    and zero otherwise; this is the stacked circular-convolution channel.
    Used mainly by oracles that cross-check the DFT diagonalization.
    """
    taps = np.asarray(taps)
    n_taps, rows, cols = taps.shape
    if n_taps > n_subcarriers:
        raise DimensionMismatch(
            f"tap count {n_taps} exceeds subcarrier count {n_subcarriers}"
        )
    k = n_subcarriers
    out = np.zeros((k * rows, k * cols), dtype=complex)
    for r in range(k):
        for c in range(k):
            l = (r - c) % k
            if l < n_taps:
                out[r * rows : (r + 1) * rows, c * cols : (c + 1) * cols] = taps[l]
    return out
