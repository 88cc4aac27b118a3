"""Command-line entry point: ``lpvmax {simulate,identify,realize,benchmark}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import io
from .errors import ConfigurationError, MonteCarloError
from .experiment import (
    ExperimentConfig,
    generate_signals,
    load_truth,
    parse_snr,
    run_monte_carlo,
    safe_covariance,
)
from .markov import SubMarkovTable
from .plr import PlrConfig, plr_fit
from .realization import default_hankel_spec, realize

log = logging.getLogger("lpvmax")


def _load_config(args):
    d = json.loads(Path(args.config).read_text()) if args.config else {}
    config = ExperimentConfig.from_dict(d)
    overrides = {
        "master_seed": args.seed,
        "model_file": args.model,
        "model_seed": args.model_seed,
        "n_train": args.n_train,
        "n_val": args.n_val,
        "n_mc": getattr(args, "n_mc", None),
        "hankel": getattr(args, "hankel", None),
        "n_x": getattr(args, "nx", None),
    }
    if args.orders:
        overrides["orders"] = tuple(args.orders)
    if args.snr and len(args.snr) == 1:
        overrides["snr_db"] = parse_snr(args.snr[0])
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(config, **overrides)


def _add_config_flags(sp):
    sp.add_argument("--config", help="JSON file with ExperimentConfig fields")
    sp.add_argument("--seed", type=int, help="master seed")
    sp.add_argument("--model", help="true model JSON (default: random model from --model-seed)")
    sp.add_argument("--model-seed", type=int)
    sp.add_argument("--n-train", type=int)
    sp.add_argument("--n-val", type=int)
    sp.add_argument("--orders", type=int, nargs=2, metavar=("NB", "NC"))


def cmd_simulate(args):
    config = _load_config(args)
    model = load_truth(config)
    sig = generate_signals(config, config.master_seed, model)
    out = Path(args.out)
    io.save_dataset(out, sig.train)
    if args.val_out:
        io.save_dataset(args.val_out, sig.val)
    if args.save_model:
        io.save_model(args.save_model, model)
    log.info("wrote %d samples to %s (measured SNR %s dB)", sig.train.N, out, sig.snr_measured)
    return 0


def cmd_identify(args):
    data = io.load_dataset(args.data)
    orders = tuple(args.orders)
    base = PlrConfig.for_snr(parse_snr(args.snr))
    plr = replace(base, **{k: v for k, v in (
        ("lambda_proc", args.lambda_proc), ("lambda_noise", args.lambda_noise),
        ("max_iters", args.max_iters), ("tol", args.tol)) if v is not None})
    report = plr_fit(data, orders, plr)
    spec = default_hankel_spec(data.n_p, data.n_u, data.n_y, orders, args.depth, args.nx)
    realized = realize((report.model.proc, report.model.noise), spec, strict=False,
                       sigma_e=safe_covariance(report.sigma_e, data.n_y))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.save_report(out / "report.json", report, realized)
    io.save_model(out / "model.json", realized.model)
    io.save_table(out / "process.csv", report.model.proc)
    io.save_table(out / "noise.csv", report.model.noise)
    io.save_residuals(out / "residuals.csv", report.residuals)
    io.save_singular_values(out / "singular_values.csv", realized.singular_values)
    log.info("PLR %s after %d iterations, n_x = %d", "converged" if report.converged else "stopped",
             report.iterations_used, realized.n_x)
    return 0


def cmd_realize(args):
    proc = io.load_table(args.process, args.np, args.ny, args.nu)
    if args.noise:
        noise = io.load_table(args.noise, args.np, args.ny, args.ny, monic=True)
    else:
        noise = SubMarkovTable.zeros(args.np, args.ny, args.ny, 0, monic=True)
    spec = default_hankel_spec(args.np, args.nu, args.ny, (proc.order, noise.order), args.depth, args.nx)
    realized = realize((proc, noise), spec, strict=not args.allow_deficient)
    io.save_model(args.out, realized.model)
    io.save_singular_values(Path(args.out).with_suffix(".sv.csv"), realized.singular_values)
    log.info("realized n_x = %d (rank gap %.3g)", realized.n_x, realized.rank_gap)
    return 0


def cmd_benchmark(args):
    config = _load_config(args)
    snrs = [parse_snr(s) for s in args.snr] if args.snr else [config.snr_db]
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summaries = []
    for snr in snrs:
        summaries.append(run_monte_carlo(replace(config, snr_db=snr), n_jobs=args.jobs))
        s = summaries[-1]
        log.info("SNR %s: bfr_sim %.2f (%.3f), bfr_pred %.2f (%.3f), failures %d", snr,
                 s.mean_bfr_sim, s.std_bfr_sim, s.mean_bfr_pred, s.std_bfr_pred, s.failures)
    io.write_summary(out / "summary.csv", summaries)
    io.write_runs(out / "runs.csv", summaries, config.master_seed)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="lpvmax", description="LPV-MAX identification and realization")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="simulate a model on white u and p, write a DataSet CSV")
    _add_config_flags(sp)
    sp.add_argument("--snr", nargs=1, help="output SNR in dB or 'inf'")
    sp.add_argument("--out", required=True)
    sp.add_argument("--val-out")
    sp.add_argument("--save-model")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("identify", help="PLR estimate plus realization from a DataSet CSV")
    sp.add_argument("data")
    sp.add_argument("--orders", type=int, nargs=2, default=(4, 2), metavar=("NB", "NC"))
    sp.add_argument("--snr", default="inf", help="selects the default ridge weights")
    sp.add_argument("--lambda-proc", type=float)
    sp.add_argument("--lambda-noise", type=float)
    sp.add_argument("--max-iters", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--nx", type=int)
    sp.add_argument("--depth", type=int, default=2)
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_identify)

    sp = sub.add_parser("realize", help="realize an LPV-SS model from sub-Markov table CSVs")
    sp.add_argument("process")
    sp.add_argument("--noise")
    sp.add_argument("--np", type=int, required=True)
    sp.add_argument("--nu", type=int, required=True)
    sp.add_argument("--ny", type=int, required=True)
    sp.add_argument("--nx", type=int)
    sp.add_argument("--depth", type=int, default=2)
    sp.add_argument("--allow-deficient", action="store_true")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_realize)

    sp = sub.add_parser("benchmark", help="Monte-Carlo runs, write summary.csv and runs.csv")
    _add_config_flags(sp)
    sp.add_argument("--snr", nargs="+", help="one or more SNR levels in dB ('inf' allowed)")
    sp.add_argument("--n-mc", type=int)
    sp.add_argument("--nx", type=int)
    sp.add_argument("--hankel", choices=("default", "benchmark"))
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except MonteCarloError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigurationError, ArithmeticError, LookupError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
