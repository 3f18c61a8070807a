"""Additive quantization noise model (AQNM).

Quantization gain alpha = 1 - beta, diagonal quantization-noise covariances
for the narrowband and OFDM uplink/downlink, and a Lloyd-Max scalar
quantizer that serves as the validation oracle for the built-in beta table.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import DimensionMismatch, InvalidBits, NegativePower

# Relative mean-squared distortion of the optimal scalar MMSE quantizer on a
# unit-variance Gaussian, for 1..5 bits.  Validated at test time against the
# Lloyd-Max oracle below so a transcription error cannot survive.
BETA_TABLE = {1: 0.3634, 2: 0.1175, 3: 0.03454, 4: 0.009497, 5: 0.002499}

LLOYD_MAX_FIXED_POINT_TOL = 1e-9


@dataclass(frozen=True)
class QuantConfig:
    """Resolution and the AQNM gain it induces. bits is None for infinite."""

    bits: int | None
    alpha: float
    beta: float

    def __post_init__(self):
        if abs(self.alpha - (1.0 - self.beta)) > 1e-15:
            raise ValueError("alpha must equal 1 - beta")


def quant_gain(bits):
    """QuantConfig for a b-bit ADC/DAC pair; bits=None or inf means ideal.

    Uses the table distortion for b <= 5 and the high-resolution
    approximation beta = (pi*sqrt(3)/2) * 2^(-2b) above that.
    """
    if bits is None or bits == math.inf:
        return QuantConfig(bits=None, alpha=1.0, beta=0.0)
    if int(bits) != bits or bits <= 0:
        raise InvalidBits(f"bits must be a positive integer or infinite, got {bits!r}")
    bits = int(bits)
    if bits <= 5:
        beta = BETA_TABLE[bits]
    else:
        beta = (math.pi * math.sqrt(3.0) / 2.0) * 2.0 ** (-2 * bits)
    return QuantConfig(bits=bits, alpha=1.0 - beta, beta=beta)


def lloyd_max_codebook(bits):
    """Lloyd-Max-optimal levels for a unit-variance real Gaussian.

    Trained on the analytic density to a fixed point (max centroid change
    below LLOYD_MAX_FIXED_POINT_TOL).  Returns the sorted level array.
    """
    if not 1 <= bits <= 8:
        raise InvalidBits(f"oracle supports 1..8 bits, got {bits}")
    m = 2**bits
    # Quantile initialization spreads levels over the mass evenly.
    levels = norm.ppf((np.arange(m) + 0.5) / m)
    for _ in range(500_000):
        edges = 0.5 * (levels[:-1] + levels[1:])
        lo = np.concatenate(([-np.inf], edges))
        hi = np.concatenate((edges, [np.inf]))
        prob = norm.cdf(hi) - norm.cdf(lo)
        # E[x | lo < x < hi] for the standard normal.
        mass = norm.pdf(lo) - norm.pdf(hi)
        new_levels = np.where(prob > 0, mass / np.maximum(prob, 1e-300), levels)
        delta = np.abs(new_levels - levels).max()
        levels = new_levels
        if delta < LLOYD_MAX_FIXED_POINT_TOL:
            break
    return levels


def apply_codebook(x, levels):
    """Nearest-level quantization with thresholds midway between levels."""
    edges = 0.5 * (levels[:-1] + levels[1:])
    return levels[np.digitize(x, edges)]


def lloyd_max_mse(bits, sample_count=10**6, seed=0):
    """Monte Carlo E[|r - Q(r)|^2] / E[|r|^2] for CN(0,1) input.

    Real and imaginary parts are quantized independently with the Lloyd-Max
    codebook scaled to their standard deviation.
    """
    levels = lloyd_max_codebook(bits)
    rng = np.random.default_rng(seed)
    r = rng.normal(size=2 * sample_count) / np.sqrt(2.0)  # re/im of CN(0,1)
    sigma = 1.0 / np.sqrt(2.0)
    q = sigma * apply_codebook(r / sigma, levels)
    return float(np.sum((r - q) ** 2) / np.sum(r**2))


def _check_powers(lam):
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise NegativePower("transmit powers must be >= 0")
    return lam


def ul_quant_cov(h_stacked, lam, q):
    """Diagonal of the uplink quantization-noise covariance at one BS.

    h_stacked: N_b x (N_c*N_u) channels seen by the BS; lam: matching power
    vector.  Returns the length-N_b diagonal of
    alpha*(1-alpha) * diag(H Lambda H^H + I).
    """
    lam = _check_powers(lam)
    h_stacked = np.asarray(h_stacked)
    if h_stacked.shape[1] != lam.shape[0]:
        raise DimensionMismatch(
            f"{h_stacked.shape[1]} channel columns vs {lam.shape[0]} powers"
        )
    sig = (np.abs(h_stacked) ** 2) @ lam + 1.0
    return q.alpha * (1.0 - q.alpha) * sig


def dl_quant_cov(w_cell, q):
    """Diagonal of the downlink quantization-noise covariance at one BS:
    alpha*(1-alpha) * diag(W W^H) for the N_b x N_u precoder matrix."""
    w_cell = np.asarray(w_cell)
    return q.alpha * (1.0 - q.alpha) * np.sum(np.abs(w_cell) ** 2, axis=1)


def ofdm_ul_quant_core(freq_channels_at_bs, lam_subc):
    """Per-antenna core of the wideband UL quantization diagonal at one BS.

    freq_channels_at_bs: (N_c, K, N_b, N_u) frequency responses G_{i,j}(k)
    for receiving BS i; lam_subc: (N_c, N_u, K) powers.  Returns the length
    N_b vector d with d[n] = (1/K) * sum_{j,v,k} lam[j,v,k] |G[j,k,n,v]|^2.
    The full K*N_b time-domain diagonal is K copies of this vector because
    the stacked channel is block circulant.
    """
    g = np.asarray(freq_channels_at_bs)
    lam = _check_powers(lam_subc)
    n_cells, n_subc = g.shape[0], g.shape[1]
    if lam.shape != (n_cells, g.shape[3], n_subc):
        raise DimensionMismatch(
            f"powers shaped {lam.shape}, expected {(n_cells, g.shape[3], n_subc)}"
        )
    # |G|^2 is (j, k, n, v); powers are (j, v, k).
    return np.einsum("jknv,jvk->n", np.abs(g) ** 2, lam) / n_subc


def ofdm_ul_quant_cov_diag(taps_at_bs, lam_subc, q, n_subcarriers):
    """K*N_b diagonal of the wideband UL quantization covariance (time domain).

    taps_at_bs: (N_c, L, N_b, N_u) taps of every cell's channel into this BS.
    Entry (t, n) equals alpha*(1-alpha) * (d[n] + 1), identical for every
    OFDM symbol time t; computed without materializing the stacked matrix.
    """
    from .numerics import taps_to_freq

    taps_at_bs = np.asarray(taps_at_bs)
    g = np.stack(
        [taps_to_freq(taps_at_bs[j], n_subcarriers) for j in range(taps_at_bs.shape[0])]
    )
    d = ofdm_ul_quant_core(g, lam_subc)
    n_b = taps_at_bs.shape[2]
    full = np.tile(d + 1.0, n_subcarriers)
    assert full.shape == (n_subcarriers * n_b,)
    return q.alpha * (1.0 - q.alpha) * full


def ofdm_dl_quant_core(w_subc):
    """Per-antenna core of the wideband DL quantization diagonal at one BS.

    w_subc: (K, N_b, N_u) per-subcarrier precoders.  Returns length-N_b
    d[n] = (1/K) * sum_{k,v} |W(k)[n,v]|^2.
    """
    w = np.asarray(w_subc)
    return np.sum(np.abs(w) ** 2, axis=(0, 2)) / w.shape[0]


def ofdm_dl_quant_cov_diag(w_subc, q, n_subcarriers):
    """K*N_b diagonal of alpha*(1-alpha)*diag(Psi^H W W^H Psi), as row norms."""
    w = np.asarray(w_subc)
    if w.shape[0] != n_subcarriers:
        raise DimensionMismatch(
            f"{w.shape[0]} precoder blocks vs {n_subcarriers} subcarriers"
        )
    d = ofdm_dl_quant_core(w)
    return q.alpha * (1.0 - q.alpha) * np.tile(d, n_subcarriers)
