"""Monte Carlo experiment runner: one record per (trial, target, algorithm)."""

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import comp_solver, deterministic, network, ofdm_solver, percell, sinr
from ..errors import QcompError

SINR_DB_FLOOR = -400.0  # users of silenced cells are reported at this floor


@dataclass
class TrialRecord:
    trial: int
    seed: int
    algorithm: str
    bits: int | None
    gamma_db: float
    converged: bool
    iterations: int = 0
    total_ul_power: float | None = None
    total_ul_power_dbm: float | None = None
    total_dl_power: float | None = None
    total_dl_power_dbm: float | None = None
    user_sinr_db: list = field(default_factory=list)
    zeroed_cells: list = field(default_factory=list)
    duality_gap: float | None = None
    error: str | None = None

    def to_json_dict(self):
        d = dataclasses.asdict(self)
        d["bits"] = "inf" if self.bits is None else self.bits
        return d

    @classmethod
    def from_json_dict(cls, d):
        d = dict(d)
        d["bits"] = None if d["bits"] == "inf" else int(d["bits"])
        return cls(**d)


def _dbm(power_mw):
    if power_mw is None or power_mw <= 0:
        return None
    return 10.0 * math.log10(power_mw)


def _sinr_db(values):
    lin = np.maximum(np.asarray(values, dtype=float).reshape(-1), 1e-40)
    return list(np.maximum(10.0 * np.log10(lin), SINR_DB_FLOOR))


def run_single(channels, algorithm, gamma_db, alpha, **solver_kwargs):
    """Solve one realization with one algorithm and pack a TrialRecord."""
    sc = channels.scenario
    gamma_lin = 10.0 ** (gamma_db / 10.0)
    rec = TrialRecord(
        trial=0,
        seed=sc.seed,
        algorithm=algorithm,
        bits=None if sc.adc_dac_bits in (None, math.inf) else int(sc.adc_dac_bits),
        gamma_db=float(gamma_db),
        converged=False,
    )
    try:
        if algorithm == "icomp":
            lam, beams, audit = comp_solver.solve_icomp(
                channels, gamma_lin, alpha, **solver_kwargs
            )
            rec.converged = audit.converged
            rec.iterations = audit.iterations
            rec.total_ul_power = float(lam.sum())
            rec.total_dl_power = audit.total_dl_power
            rec.user_sinr_db = _sinr_db(audit.achieved_sinr)
            rec.duality_gap = audit.duality_gap
        elif algorithm == "percell":
            lam, beams, report = percell.percell_solve(
                channels, gamma_lin, alpha, **solver_kwargs
            )
            rec.converged = report.converged
            rec.iterations = report.iterations
            rec.total_ul_power = float(lam.sum())
            rec.user_sinr_db = _sinr_db(report.achieved_sinr)
        elif algorithm == "dcomp":
            lam_cells, zeroed = deterministic.solve_deterministic(
                channels, gamma_lin, alpha
            )
            lam = deterministic.broadcast_to_users(lam_cells, sc.n_users_per_cell)
            achieved = sinr.mmse_ul_sinr(channels, lam, alpha)
            rec.converged = True
            rec.zeroed_cells = list(zeroed)
            rec.total_ul_power = float(lam.sum())
            rec.user_sinr_db = _sinr_db(achieved)
        elif algorithm == "ofdm_icomp":
            problem = ofdm_solver.OfdmProblem.from_channels(channels, gamma_lin, alpha)
            lam, beams, audit = ofdm_solver.solve_ofdm_icomp(problem, **solver_kwargs)
            rec.converged = audit.converged
            rec.iterations = audit.iterations
            rec.total_ul_power = float(lam.sum())
            rec.total_dl_power = audit.total_dl_power
            rec.user_sinr_db = _sinr_db(audit.achieved_sinr)
            rec.duality_gap = audit.duality_gap
        else:
            raise ValueError(f"unknown algorithm {algorithm!r}")
    except QcompError as e:
        rec.converged = False
        rec.error = f"{type(e).__name__}: {e}"
        report = getattr(e, "report", None)
        if report is not None:
            rec.iterations = report.iterations
    rec.total_ul_power_dbm = _dbm(rec.total_ul_power)
    rec.total_dl_power_dbm = _dbm(rec.total_dl_power)
    return rec


def _run_trial(config, trial):
    sc = config.scenario.with_seed(config.trial_seed_base + trial)
    channels = network.draw_channels(sc)
    from ..quantization import quant_gain

    alpha = quant_gain(sc.adc_dac_bits).alpha
    records = []
    for gamma_db in config.gamma_values():
        rec = run_single(channels, config.algorithm, gamma_db, alpha)
        rec.trial = trial
        rec.seed = sc.seed
        records.append(rec)
    return records


def run_experiment(config):
    """All trials of one experiment; records sorted by (trial, gamma)."""
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(_run_trial, [config] * config.n_trials, range(config.n_trials)))
    else:
        chunks = [_run_trial(config, t) for t in range(config.n_trials)]
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: (r.trial, r.gamma_db, r.algorithm))
    return records
