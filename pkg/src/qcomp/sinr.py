"""Exact SINR evaluation under coarse quantization.

These evaluators are the ground truth every solver is audited against: they
implement the UL/DL SINR expressions (narrowband and OFDM) term by term,
with the quantization contribution built from the diagonal covariances.
"""

from dataclasses import dataclass

import numpy as np

from . import quantization
from .errors import DimensionMismatch
from .numerics import hermitian_solve


@dataclass(frozen=True)
class BeamformerSet:
    """Combiners f, precoders w, and the DL scaling coefficients tau.

    Narrowband shapes: (N_c, N_u, N_b) and (N_c, N_u); wideband adds a
    subcarrier axis: (N_c, N_u, K, N_b) and (N_c, N_u, K).
    """

    combiners: np.ndarray | None = None
    precoders: np.ndarray | None = None
    tau: np.ndarray | None = None


def check_powers(lam, shape=None):
    lam = np.asarray(lam, dtype=float)
    if not np.all(np.isfinite(lam)) or np.any(lam < 0):
        raise ValueError("powers must be finite and nonnegative")
    if shape is not None and lam.shape != shape:
        raise DimensionMismatch(f"powers shaped {lam.shape}, expected {shape}")
    return lam


def _qcfg(alpha):
    return quantization.QuantConfig(bits=None, alpha=alpha, beta=1.0 - alpha)


def ul_sinr(channels, combiners, lam, alpha):
    """Uplink SINR per (cell, user) for arbitrary combiners.

    Denominator: other-user interference, AWGN, and the combiner-projected
    quantization covariance of the receiving BS.
    """
    h = channels.h
    n_c, _, n_b, n_u = h.shape
    lam = check_powers(lam, (n_c, n_u))
    f = np.asarray(combiners)
    if f.shape != (n_c, n_u, n_b):
        raise DimensionMismatch(f"combiners shaped {f.shape}")
    lam_flat = lam.reshape(-1)
    out = np.zeros((n_c, n_u))
    for i in range(n_c):
        h_i = channels.stacked(i)
        cq = quantization.ul_quant_cov(h_i, lam_flat, _qcfg(alpha))
        for u in range(n_u):
            fv = f[i, u]
            gains = np.abs(fv.conj() @ h_i) ** 2
            own = i * n_u + u
            num = alpha**2 * lam_flat[own] * gains[own]
            interf = alpha**2 * (lam_flat @ gains - lam_flat[own] * gains[own])
            noise = alpha**2 * np.sum(np.abs(fv) ** 2)
            quant = np.abs(fv) ** 2 @ cq
            out[i, u] = num / (interf + noise + quant)
    return out


def dl_sinr(channels, precoders, alpha):
    """Downlink SINR per (cell, user) for arbitrary precoders."""
    h = channels.h
    n_c, _, n_b, n_u = h.shape
    w = np.asarray(precoders)
    if w.shape != (n_c, n_u, n_b):
        raise DimensionMismatch(f"precoders shaped {w.shape}")
    cqd = np.stack(
        [quantization.dl_quant_cov(w[j].T, _qcfg(alpha)) for j in range(n_c)]
    )
    out = np.zeros((n_c, n_u))
    for i in range(n_c):
        for u in range(n_u):
            own = np.abs(w[i, u].conj() @ h[i, i, :, u]) ** 2
            cross_total = 0.0
            quant = 0.0
            for j in range(n_c):
                huser = h[j, i, :, u]  # BS j -> user u of cell i
                cross_total += np.sum(np.abs(w[j].conj() @ huser) ** 2)
                quant += np.abs(huser) ** 2 @ cqd[j]
            den = alpha**2 * (cross_total - own) + quant + 1.0
            out[i, u] = alpha**2 * own / den
    return out


def interference_plus_signal_cov(channels, lam, alpha, cell):
    """alpha^2 * H_i Lambda H_i^H + alpha I + alpha(1-alpha) diag(H_i Lambda H_i^H).

    Subtracting alpha^2 * lam_{i,u} h h^H from this matrix yields the exact
    interference-plus-noise covariance of user (i, u).
    """
    h_i = channels.stacked(cell)
    lam_flat = np.asarray(lam).reshape(-1)
    m = (h_i * lam_flat) @ h_i.conj().T
    c = alpha**2 * m + alpha * np.eye(h_i.shape[0])
    c[np.diag_indices_from(c)] += alpha * (1.0 - alpha) * np.real(np.diag(m))
    return 0.5 * (c + c.conj().T)


def mmse_ul_sinr(channels, lam, alpha):
    """SINR achieved by the exact MMSE combiner, per (cell, user).

    Evaluated through the rank-one update of the all-user covariance, which
    equals the direct evaluation of the UL SINR at the MMSE combiner.
    """
    h = channels.h
    n_c, _, _, n_u = h.shape
    lam = check_powers(lam, (n_c, n_u))
    out = np.zeros((n_c, n_u))
    for i in range(n_c):
        c_all = interference_plus_signal_cov(channels, lam, alpha, i)
        x = hermitian_solve(c_all, h[i, i])
        t = np.real(np.sum(h[i, i].conj() * x, axis=0))
        s = alpha**2 * lam[i] * t
        out[i] = s / (1.0 - s)
    return out


# ---------------------------------------------------------------------------
# Wideband OFDM evaluators.  freq_g has shape (N_c, N_c, K, N_b, N_u) with
# freq_g[i, j, k] the subcarrier-k response between BS i and cell j's users.
# ---------------------------------------------------------------------------


def ofdm_ul_sinr(freq_g, combiners, lam, alpha):
    """Uplink per-(cell, user, subcarrier) SINR for arbitrary combiners.

    The quantization covariance couples subcarriers through the time-domain
    diagonal; per subcarrier it projects to the same per-antenna diagonal.
    """
    g = np.asarray(freq_g)
    n_c, _, n_k, n_b, n_u = g.shape
    lam = check_powers(lam, (n_c, n_u, n_k))
    f = np.asarray(combiners)
    if f.shape != (n_c, n_u, n_k, n_b):
        raise DimensionMismatch(f"combiners shaped {f.shape}")
    out = np.zeros((n_c, n_u, n_k))
    for i in range(n_c):
        d_i = quantization.ofdm_ul_quant_core(g[i], lam)
        for k in range(n_k):
            g_k = g[i, :, k].transpose(1, 0, 2).reshape(n_b, n_c * n_u)
            lam_k = lam[:, :, k].reshape(-1)
            for u in range(n_u):
                fv = f[i, u, k]
                gains = np.abs(fv.conj() @ g_k) ** 2
                own = i * n_u + u
                num = alpha**2 * lam_k[own] * gains[own]
                interf = alpha**2 * (lam_k @ gains - lam_k[own] * gains[own])
                noise = alpha**2 * np.sum(np.abs(fv) ** 2)
                quant = alpha * (1.0 - alpha) * (np.abs(fv) ** 2 @ (d_i + 1.0))
                out[i, u, k] = num / (interf + noise + quant)
    return out


def ofdm_dl_sinr(freq_g, precoders, alpha):
    """Downlink per-(cell, user, subcarrier) SINR for arbitrary precoders."""
    g = np.asarray(freq_g)
    n_c, _, n_k, n_b, n_u = g.shape
    w = np.asarray(precoders)
    if w.shape != (n_c, n_u, n_k, n_b):
        raise DimensionMismatch(f"precoders shaped {w.shape}")
    # Per-BS per-antenna DL quantization core, shared by all subcarriers.
    e = np.stack(
        [quantization.ofdm_dl_quant_core(w[j].transpose(1, 2, 0)) for j in range(n_c)]
    )
    out = np.zeros((n_c, n_u, n_k))
    for i in range(n_c):
        for u in range(n_u):
            for k in range(n_k):
                own = np.abs(w[i, u, k].conj() @ g[i, i, k, :, u]) ** 2
                cross_total = 0.0
                quant = 0.0
                for j in range(n_c):
                    guser = g[j, i, k, :, u]
                    cross_total += np.sum(np.abs(w[j, :, k].conj() @ guser) ** 2)
                    quant += alpha * (1.0 - alpha) * (np.abs(guser) ** 2 @ e[j])
                den = alpha**2 * (cross_total - own) + quant + 1.0
                out[i, u, k] = alpha**2 * own / den
    return out
