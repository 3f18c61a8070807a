"""Self-certifying oracles runnable from the CLI (`qcomp validate`).

Each check pits a production routine against an independent reference:
the quantizer table against a trained Lloyd-Max quantizer, the eigenvalue
routine against characteristic-polynomial roots, the DFT conversion against
a dense block-circulant product, and the duality identities end to end.
"""

import numpy as np

from .. import comp_solver, network
from ..numerics import block_circulant, dft_matrix, extremal_eigenvalue, taps_to_freq
from ..quantization import BETA_TABLE, lloyd_max_mse, quant_gain


def char_poly_extremal(a, which):
    """Extremal eigenvalue via Faddeev-LeVerrier coefficients and companion
    roots; an algorithmically independent route from the dense eigensolver."""
    a = np.asarray(a)
    n = a.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ m + coeffs[k - 1] * np.eye(n)
        coeffs[k] = -np.trace(a @ m).real / k
    roots = np.roots(coeffs)
    real_roots = np.real(roots[np.abs(np.imag(roots)) < 1e-6 * max(1.0, np.abs(roots).max())])
    return float(real_roots.max() if which == "max" else real_roots.min())


def check_quantizer(sample_count=10**6, tol=0.01):
    results = []
    for bits, beta_ref in sorted(BETA_TABLE.items()):
        mse = lloyd_max_mse(bits, sample_count=sample_count, seed=1000 + bits)
        rel = abs(mse - beta_ref) / beta_ref
        results.append(
            (f"quantizer b={bits}", rel <= tol, f"oracle {mse:.6g} vs table {beta_ref:.6g} (rel {rel:.2e})")
        )
    return results


def check_eigen(n_instances=20, tol=1e-8):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(n_instances):
        b = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        a = b @ b.conj().T
        for which in ("max", "min"):
            got = extremal_eigenvalue(a, which)
            ref = char_poly_extremal(a, which)
            worst = max(worst, abs(got - ref) / max(abs(ref), 1e-12))
    return [("extremal eigenvalues", worst <= tol, f"worst relative error {worst:.2e}")]


def check_block_circulant(tol=1e-9):
    rng = np.random.default_rng(11)
    taps = rng.normal(size=(3, 2, 2)) + 1j * rng.normal(size=(3, 2, 2))
    k = 8
    bc = block_circulant(taps, k)
    psi_b = np.kron(dft_matrix(k), np.eye(2))
    psi_u = np.kron(dft_matrix(k), np.eye(2))
    diag = psi_b @ bc @ psi_u.conj().T
    blocks = taps_to_freq(taps, k)
    off = diag.copy()
    err = 0.0
    for kk in range(k):
        sl = slice(2 * kk, 2 * kk + 2)
        err = max(err, np.abs(diag[sl, sl] - blocks[kk]).max())
        off[sl, sl] = 0.0
    off_mass = np.abs(off).max() / max(np.abs(diag).max(), 1e-300)
    ok = err <= 1e-10 * max(1.0, np.abs(blocks).max()) and off_mass <= tol
    return [
        (
            "block-circulant diagonalization",
            ok,
            f"block error {err:.2e}, off-block mass {off_mass:.2e}",
        )
    ]


def check_duality(tol=1e-6):
    scenario = network.Scenario(
        n_cells=2, n_users_per_cell=2, n_bs_antennas=8, adc_dac_bits=3, seed=33
    )
    channels = network.draw_channels(scenario)
    gamma = 10.0 ** (0.0 / 10.0)
    alpha = quant_gain(scenario.adc_dac_bits).alpha
    lam, beams, audit = comp_solver.solve_icomp(channels, gamma, alpha)
    gap_ok = audit.duality_gap is not None and audit.duality_gap <= tol
    dl_ok = audit.max_dl_residual is not None and audit.max_dl_residual <= tol
    ul_ok = audit.max_ul_residual <= tol
    return [
        ("strong duality gap", gap_ok, f"gap {audit.duality_gap:.2e}"),
        ("UL constraints active", ul_ok, f"max residual {audit.max_ul_residual:.2e}"),
        ("DL targets met", dl_ok, f"max residual {audit.max_dl_residual:.2e}"),
    ]


def run_all(sample_count=10**6):
    results = []
    results += check_quantizer(sample_count=sample_count)
    results += check_eigen()
    results += check_block_circulant()
    results += check_duality()
    return results
