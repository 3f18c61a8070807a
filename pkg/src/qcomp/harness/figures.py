"""Figure rendering for the report path.

Renders the power-sweep and SINR-CDF figures next to the CSV tables.  The
Agg backend plus stripped PNG metadata keeps the bytes reproducible.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_SAVE_KW = dict(dpi=150, metadata={"Software": None})


def _label(algo, bits):
    return f"{algo}, b={bits}"


def plot_power_sweep(sweep_rows, path):
    """Mean total power and infeasible fraction versus the target SINR."""
    fig, (ax_pow, ax_inf) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
    groups = {}
    for algo, bits, gamma_db, mean_dbm, _p5, _p95, infeasible, _nc, _nt in sweep_rows:
        groups.setdefault((algo, bits), []).append((gamma_db, mean_dbm, infeasible))
    for (algo, bits), pts in sorted(groups.items()):
        pts.sort()
        gammas = [p[0] for p in pts]
        means = [p[1] for p in pts]
        fracs = [p[2] for p in pts]
        ax_pow.plot(gammas, means, marker="o", label=_label(algo, bits))
        ax_inf.plot(gammas, fracs, marker="s", label=_label(algo, bits))
    ax_pow.set_ylabel("Mean total UL power [dBm]")
    ax_pow.grid(True)
    ax_pow.legend(fontsize=8)
    ax_inf.set_xlabel("Target SINR [dB]")
    ax_inf.set_ylabel("Infeasible fraction")
    ax_inf.set_ylim(-0.05, 1.05)
    ax_inf.grid(True)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_cdf(cdf_rows, path):
    """Empirical per-user SINR CDF, one step curve per algorithm/bit depth."""
    fig, ax = plt.subplots(figsize=(7, 5))
    groups = {}
    for algo, bits, sinr_db, cdf in cdf_rows:
        groups.setdefault((algo, bits), []).append((sinr_db, cdf))
    for (algo, bits), pts in sorted(groups.items()):
        pts.sort()
        ax.step(
            [p[0] for p in pts],
            [p[1] for p in pts],
            where="post",
            label=_label(algo, bits),
        )
    ax.set_xlabel("Achieved SINR [dB]")
    ax.set_ylabel("CDF")
    ax.set_ylim(0, 1.02)
    ax.grid(True)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_convergence(trace, path, title="Total power per iteration"):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(range(1, len(trace) + 1), trace, marker=".")
    ax.set_xlabel("Iteration")
    ax.set_ylabel("Total UL power [mW]")
    ax.set_title(title)
    ax.grid(True)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
