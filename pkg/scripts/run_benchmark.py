"""Monte-Carlo benchmark at SNR = inf, 40 and 10 dB on a random 2/2/2/2 model.

Writes summary.csv and runs.csv to the output directory and prints the table.

    python3 scripts/run_benchmark.py --n-mc 10 --out results/benchmark
"""

import argparse
import logging
from pathlib import Path

from lpvmax import io
from lpvmax.experiment import ExperimentConfig, format_snr, sweep_snr


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-mc", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--model-seed", type=int, default=0)
    ap.add_argument("--snr", nargs="+", default=["inf", "40", "10"])
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="results/benchmark")
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)

    config = ExperimentConfig(n_mc=args.n_mc, master_seed=args.seed, model_seed=args.model_seed)
    summaries = sweep_snr(config, args.snr, n_jobs=args.jobs)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_summary(out / "summary.csv", summaries)
    io.write_runs(out / "runs.csv", summaries, config.master_seed)

    print(f"{'SNR':>6}  {'sim BFR':>16}  {'pred BFR':>16}  failures")
    for s in summaries:
        print(f"{format_snr(s.snr_db):>6}  {s.mean_bfr_sim:7.2f} ({s.std_bfr_sim:6.3f})"
              f"  {s.mean_bfr_pred:7.2f} ({s.std_bfr_pred:6.3f})  {s.failures}")


if __name__ == "__main__":
    main()
