"""Replicated scenario runs: per-batch metric means for each method.

Full-scale Scenario 1 is ``--p 80 --n-signal 20 --batches 50 --replicates 25``;
the defaults are a desk-scale analog that finishes in a few minutes.

    python scripts/run_experiment.py --scenario 1 --out results/s1
"""

import argparse
import csv
import time
from pathlib import Path


from onlinebms.experiment import ExperimentConfig, run_experiment, summarize
from onlinebms.metrics import write_eval_records
from onlinebms.pipeline import PipelineConfig
from onlinebms.simulate import SCENARIO_SCALES, scenario

METRICS = ("rmse_beta", "tpr", "fpr", "auc", "wall_time")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--scenario", type=int, choices=sorted(SCENARIO_SCALES), default=1)
    ap.add_argument("--p", type=int, default=20)
    ap.add_argument("--n-signal", type=int, default=5)
    ap.add_argument("--batches", type=int, default=20)
    ap.add_argument("--batch-size", type=int, default=300)
    ap.add_argument("--replicates", type=int, default=5)
    ap.add_argument("--test-size", type=int, default=15_000)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--methods", default="online_changing,online_fixed,offline")
    ap.add_argument("--iterations", type=int, default=12_000)
    ap.add_argument("--burn-in", type=int, default=2_000)
    ap.add_argument("--access-window", type=int, default=10)
    ap.add_argument("--report-batches", default="", help="comma list; default every 5th and the last")
    ap.add_argument("--out", type=Path, required=True)
    args = ap.parse_args()

    spec = scenario(args.scenario, p=args.p, n_signal=args.n_signal, n_batches=args.batches,
                    batch_size=args.batch_size, replicates=args.replicates,
                    test_size=args.test_size, seed=args.seed)
    pipe = PipelineConfig(iterations=args.iterations, burn_in=args.burn_in,
                          access_window=args.access_window, screening_batches=args.access_window)
    cfg = ExperimentConfig(spec, tuple(args.methods.split(",")), pipe)

    t0 = time.perf_counter()
    records = run_experiment(cfg, progress=lambda r: print(
        f"replicate {r + 1}/{spec.replicates} done ({time.perf_counter() - t0:.0f}s)", flush=True))
    args.out.mkdir(parents=True, exist_ok=True)
    write_eval_records(args.out / "eval_all.csv", records)

    with open(args.out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["batch", "method", *METRICS])
        for b in range(1, spec.n_batches + 1):
            for m, row in summarize(records, b).items():
                w.writerow([b, m, *(repr(row[k]) for k in METRICS)])

    if args.report_batches:
        shown = [int(b) for b in args.report_batches.split(",")]
    else:
        shown = sorted({*range(5, spec.n_batches + 1, 5), spec.n_batches})
    print(f"\nscenario {args.scenario}: p={spec.p}, {spec.n_signal} signals, "
          f"{spec.replicates} replicates (means)")
    print(f"{'batch':>5}  {'method':<16}" + "".join(f"{k:>11}" for k in METRICS))
    for b in shown:
        for m, row in summarize(records, b).items():
            print(f"{b:>5}  {m:<16}" + "".join(f"{row[k]:>11.4f}" for k in METRICS))
    print(f"\nwrote {args.out / 'summary.csv'} and {args.out / 'eval_all.csv'}")


if __name__ == "__main__":
    main()
