"""Command-line harness: solve / sweep / cdf / validate.

`sweep` and `cdf` write a JSONL record file, a CSV summary, and a rendered
figure into the output directory; reruns with the same configuration and
seeds are byte-identical.
"""

import argparse
import dataclasses
import json
import os
import sys

from .. import __version__
from ..errors import ConfigError, QcompError
from ..network import noise_power_dbm
from . import figures, io, selfcheck
from .config import ExperimentConfig, config_from_mapping, load_config, parse_bits
from .runner import run_experiment
from .summaries import CDF_HEADER, SWEEP_HEADER, summarize_cdf, summarize_power_sweep


def _add_common(parser):
    parser.add_argument("--config", help="YAML experiment file")
    parser.add_argument("--seed", type=int, help="trial seed base override")
    parser.add_argument("--trials", type=int, help="number of Monte Carlo trials")
    parser.add_argument("--algo", help="algorithm name, or comma list for sweep/cdf")
    parser.add_argument("--bits", help="ADC/DAC bits ('inf' allowed), or comma list")
    parser.add_argument("--gamma-db", help="target SINR dB, or comma list")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--workers", type=int, help="parallel trial workers")


def _base_config(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.seed is not None:
        overrides["trial_seed_base"] = args.seed
    if args.trials is not None:
        overrides["n_trials"] = args.trials
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.workers is not None:
        overrides["workers"] = args.workers
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg


def _csv_list(value):
    return [v.strip() for v in str(value).split(",") if v.strip()]


def _variants(cfg, args, multi_gamma_default):
    """One config per (algorithm, bits) combination requested on the CLI."""
    algos = _csv_list(args.algo) if args.algo else [cfg.algorithm]
    bits_list = (
        [parse_bits(b) for b in _csv_list(args.bits)]
        if args.bits
        else [cfg.scenario.adc_dac_bits]
    )
    if args.gamma_db:
        sweep = tuple(float(g) for g in _csv_list(args.gamma_db))
    elif cfg.sweep is not None:
        sweep = cfg.sweep
    else:
        sweep = tuple(multi_gamma_default)
    out = []
    for algo in algos:
        for bits in bits_list:
            scenario = dataclasses.replace(cfg.scenario, adc_dac_bits=bits)
            out.append(
                dataclasses.replace(cfg, scenario=scenario, algorithm=algo, sweep=sweep)
            )
    return out


def _write_outputs(records, configs, outdir, kind):
    os.makedirs(outdir, exist_ok=True)
    io.write_records_jsonl(os.path.join(outdir, f"{kind}_records.jsonl"), records)
    def _echo(cfg):
        d = dataclasses.asdict(cfg)
        d.pop("output_dir", None)  # invocation detail, not experiment identity
        return json.loads(json.dumps(d, default=str))

    meta = {
        "tool": f"qcomp {__version__}",
        "kind": kind,
        "noise_power_dbm": noise_power_dbm(
            configs[0].scenario.bandwidth_hz, configs[0].scenario.noise_figure_db
        ),
        "configs": [_echo(c) for c in configs],
    }
    io.write_metadata(os.path.join(outdir, f"{kind}_metadata.json"), meta)
    if kind == "sweep":
        rows = summarize_power_sweep(records)
        io.write_csv(os.path.join(outdir, "sweep_summary.csv"), SWEEP_HEADER, rows)
        figures.plot_power_sweep(rows, os.path.join(outdir, "sweep_power.png"))
    else:
        rows = summarize_cdf(records)
        io.write_csv(os.path.join(outdir, "cdf_summary.csv"), CDF_HEADER, rows)
        figures.plot_cdf(rows, os.path.join(outdir, "cdf.png"))
    return rows


def cmd_solve(args):
    cfg = _base_config(args)
    variants = _variants(cfg, args, multi_gamma_default=[cfg.scenario.target_sinr_db])
    if len(variants) != 1 or len(variants[0].gamma_values()) != 1:
        raise ConfigError("solve takes a single algorithm, bit depth, and target")
    cfg = dataclasses.replace(variants[0], n_trials=1)
    records = run_experiment(cfg)
    rec = records[0]
    print(f"algorithm        : {rec.algorithm}")
    print(f"bits             : {'inf' if rec.bits is None else rec.bits}")
    print(f"target SINR [dB] : {rec.gamma_db:g}")
    print(f"converged        : {rec.converged}")
    print(f"iterations       : {rec.iterations}")
    if rec.error:
        print(f"error            : {rec.error}")
    if rec.total_ul_power is not None:
        print(f"total UL power   : {rec.total_ul_power:.6g} mW ({rec.total_ul_power_dbm:.3f} dBm)")
    if rec.total_dl_power is not None:
        print(f"total DL power   : {rec.total_dl_power:.6g} mW ({rec.total_dl_power_dbm:.3f} dBm)")
    if rec.duality_gap is not None:
        print(f"duality gap      : {rec.duality_gap:.3e}")
    if rec.user_sinr_db:
        worst = min(rec.user_sinr_db)
        print(f"worst user SINR  : {worst:.6f} dB")
    if rec.zeroed_cells:
        print(f"silenced cells   : {rec.zeroed_cells}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        io.write_records_jsonl(os.path.join(args.out, "solve_records.jsonl"), records)
    return 0


def _run_multi(args, kind, default_gammas):
    cfg = _base_config(args)
    variants = _variants(cfg, args, multi_gamma_default=default_gammas)
    records = []
    for v in variants:
        records.extend(run_experiment(v))
    records.sort(key=lambda r: (r.trial, r.gamma_db, r.algorithm, str(r.bits)))
    outdir = variants[0].output_dir
    _write_outputs(records, variants, outdir, kind)
    n_inf = sum(1 for r in records if not r.converged)
    print(f"{kind}: {len(records)} records ({n_inf} infeasible) -> {outdir}")
    return 0


def cmd_sweep(args):
    return _run_multi(args, "sweep", default_gammas=[-5.0, 0.0, 5.0, 10.0, 15.0])


def cmd_cdf(args):
    cfg = _base_config(args)
    return _run_multi(args, "cdf", default_gammas=[cfg.scenario.target_sinr_db])


def cmd_validate(args):
    results = selfcheck.run_all(sample_count=args.samples)
    failed = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        if not ok:
            failed += 1
        print(f"[{status}] {name}: {detail}")
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qcomp",
        description="Multicell beamforming/power-control simulations under coarse quantization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one scenario and print the report")
    _add_common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="total power versus target SINR")
    _add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_cdf = sub.add_parser("cdf", help="per-user achieved SINR CDF")
    _add_common(p_cdf)
    p_cdf.set_defaults(func=cmd_cdf)

    p_val = sub.add_parser("validate", help="run the built-in self-check oracles")
    p_val.add_argument("--samples", type=int, default=10**6, help="quantizer Monte Carlo samples")
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except QcompError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
