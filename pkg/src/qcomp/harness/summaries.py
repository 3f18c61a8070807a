"""Statistics over trial records: SINR CDFs and power-sweep aggregates.

No statistic mixes converged and infeasible trials; the infeasible fraction
is always reported separately.
"""

import numpy as np


def _bits_key(bits):
    return "inf" if bits is None else str(bits)


def summarize_cdf(records):
    """Empirical per-user SINR CDF per (algorithm, bits).

    Returns rows (algorithm, bits, sinr_db, cdf), monotone nondecreasing in
    cdf and ending at 1 per group.  Converged trials only.
    """
    groups = {}
    for rec in records:
        if not rec.converged:
            continue
        groups.setdefault((rec.algorithm, _bits_key(rec.bits)), []).extend(
            rec.user_sinr_db
        )
    rows = []
    for (algo, bits), values in sorted(groups.items()):
        values = np.sort(np.asarray(values, dtype=float))
        n = len(values)
        for idx, v in enumerate(values):
            rows.append((algo, bits, float(v), (idx + 1) / n))
    return rows


def summarize_power_sweep(records):
    """Aggregate total UL power versus target per (algorithm, bits, gamma).

    Returns rows (algorithm, bits, gamma_db, mean_total_power_dbm, p5_dbm,
    p95_dbm, infeasible_fraction, n_converged, n_total); power fields are
    None when no trial converged.
    """
    groups = {}
    for rec in records:
        key = (rec.algorithm, _bits_key(rec.bits), rec.gamma_db)
        groups.setdefault(key, []).append(rec)
    rows = []
    for (algo, bits, gamma_db), recs in sorted(groups.items()):
        powers = np.array(
            [r.total_ul_power for r in recs if r.converged and r.total_ul_power],
            dtype=float,
        )
        n_total = len(recs)
        n_conv = sum(1 for r in recs if r.converged)
        infeasible = 1.0 - n_conv / n_total
        if len(powers):
            mean_dbm = 10.0 * np.log10(powers.mean())
            p5_dbm = 10.0 * np.log10(np.percentile(powers, 5.0))
            p95_dbm = 10.0 * np.log10(np.percentile(powers, 95.0))
        else:
            mean_dbm = p5_dbm = p95_dbm = None
        rows.append(
            (algo, bits, gamma_db, mean_dbm, p5_dbm, p95_dbm, infeasible, n_conv, n_total)
        )
    return rows


CDF_HEADER = ("algorithm", "bits", "sinr_db", "cdf")
SWEEP_HEADER = (
    "algorithm",
    "bits",
    "gamma_db",
    "mean_total_power_dbm",
    "p5_dbm",
    "p95_dbm",
    "infeasible_fraction",
    "n_converged",
    "n_total",
)
