"""Command line interface: ``simulate``, ``run``, ``evaluate``, ``oracle``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import metrics
from .baselines import enumerate_bma
from .errors import ConfigurationError, DataError
from .modelspace import ModelIndicator
from .pipeline import (
    PipelineConfig,
    ReportWriter,
    StreamRunner,
    batch_files,
    ingest_batch,
    read_config_file,
    read_mpm_report,
    write_batch,
)
from .simulate import SCENARIO_SCALES, generate_batch, generate_test, scenario
from .suffstats import SuffStats

log = logging.getLogger("onlinebms")

# argparse dests that map 1:1 onto PipelineConfig fields
RUN_KEYS = ("method", "seed", "access_window", "screening_batches", "iterations", "burn_in",
            "warm_start", "prior", "prior_a", "prior_b", "ridge", "top_k")


def _add_run_options(sp):
    sp.add_argument("--config", type=Path, help="key=value file; flags override it")
    sp.add_argument("--method", choices=["online_changing", "online_fixed", "offline", "oracle"])
    sp.add_argument("--seed", type=int)
    sp.add_argument("--access-window", type=int)
    sp.add_argument("--screening-batches", type=int)
    sp.add_argument("--iterations", type=int)
    sp.add_argument("--burn-in", type=int)
    sp.add_argument("--warm-start", choices=["null_model", "previous_mpm", "random"])
    sp.add_argument("--prior", choices=["uniform", "beta-binomial", "beta_binomial"])
    sp.add_argument("--prior-a", type=float)
    sp.add_argument("--prior-b", type=float)
    sp.add_argument("--ridge", type=float)
    sp.add_argument("--top-k", type=int)
    sp.add_argument("--standardize", action="store_true", default=None)


def build_config(args) -> PipelineConfig:
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key in RUN_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if getattr(args, "standardize", None):
        values["standardize"] = True
    return PipelineConfig.from_mapping(values)


def cmd_simulate(args) -> int:
    spec = scenario(args.scenario, p=args.p, n_signal=args.n_signal, n_batches=args.batches,
                    batch_size=args.batch_size, test_size=args.test_size, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    width = max(3, len(str(spec.n_batches)))
    for b in range(1, spec.n_batches + 1):
        write_batch(out / f"batch_{b:0{width}d}.csv", generate_batch(spec, b, args.replicate))
    write_batch(out / "test.csv", generate_test(spec, args.replicate))
    with open(out / "truth.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"beta_{j}" for j in range(spec.p + 1)])
        w.writerow([repr(float(v)) for v in spec.beta_true])
    print(f"wrote {spec.n_batches} batches, test.csv and truth.csv to {out}")
    return 0


def cmd_run(args) -> int:
    files = batch_files(args.input)
    first, _ = ingest_batch(files[0])
    p = first.p
    ckpt = Path(args.checkpoint) if args.checkpoint else None
    if ckpt is not None and args.resume and ckpt.exists():
        runner = StreamRunner.restore(ckpt)
        config = runner.config
        start = runner.state.last_batch
        print(f"resuming after batch {start} from {ckpt}")
    else:
        config = build_config(args)
        runner = StreamRunner(config, p)
        start = 0
    writer = ReportWriter(args.out, p, append=start > 0)
    total_rejected = 0
    for i, path in enumerate(files[start:], start + 1):
        batch, rejected = ingest_batch(path, i, p)
        total_rejected += rejected
        out = runner.process(batch)
        writer.write(out)
        if ckpt is not None:
            runner.save(ckpt)
        print(f"batch {out.batch:4d}  {out.method}  mpm={out.gamma}  "
              f"size={out.gamma.size}  t={out.wall_time:.3f}s {out.note}".rstrip())
    if total_rejected:
        print(f"rejected {total_rejected} malformed row(s)", file=sys.stderr)
    return 0


def _read_truth(truth_dir: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    with open(truth_dir / "truth.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    beta_true = np.array([float(v) for v in rows[1]])
    test, _ = ingest_batch(truth_dir / "test.csv")
    return beta_true, test.X, test.y


def cmd_evaluate(args) -> int:
    run_dir, truth_dir = Path(args.run), Path(args.truth)
    beta_true, test_X, test_y = _read_truth(truth_dir)
    times = {}
    tpath = run_dir / "timings.csv"
    if tpath.exists():
        with open(tpath, newline="") as fh:
            for row in csv.DictReader(fh):
                times[(int(row["batch"]), row["method"])] = float(row["wall_time"])
    records = []
    for row in read_mpm_report(run_dir / "mpm_report.csv"):
        key = (row["batch"], row["method"])
        records.append(metrics.evaluate(row["batch"], row["method"], row["beta"], row["gamma"],
                                        beta_true, test_X, test_y, times.get(key, float("nan")),
                                        args.replicate))
    out = Path(args.out) if args.out else run_dir / "eval.csv"
    metrics.write_eval_records(out, records)
    last = records[-1]
    print(f"{len(records)} records -> {out}; final batch {last.batch}: rmse={last.rmse_beta:.4f} "
          f"tpr={last.tpr:.3f} fpr={last.fpr:.3f} auc={last.auc:.4f}")
    return 0


def cmd_oracle(args) -> int:
    config = build_config(args)
    files = batch_files(args.input)
    stats = None
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        for i, path in enumerate(files, 1):
            batch, _ = ingest_batch(path, i)
            if stats is None:
                stats = SuffStats.init(batch.p)
                w.writerow(["batch", "mpm", "top_model", "top_prob"]
                           + [f"incl_{j}" for j in range(1, batch.p + 1)])
            stats = stats.update(batch)
            res = enumerate_bma(stats, config.model_prior)
            top = int(np.argmax(res.probs))
            w.writerow([i, str(res.mpm()), str(ModelIndicator.from_mask(top, res.p)),
                        repr(float(res.probs[top]))]
                       + [repr(float(v)) for v in res.inclusion_probs])
            print(f"batch {i:4d}  mpm={res.mpm()}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="onlinebms", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="write a simulated stream as batch files")
    sp.add_argument("--scenario", type=int, choices=sorted(SCENARIO_SCALES), default=1)
    sp.add_argument("--p", type=int, default=80)
    sp.add_argument("--n-signal", type=int, default=20)
    sp.add_argument("--batches", type=int, default=50)
    sp.add_argument("--batch-size", type=int, default=300)
    sp.add_argument("--test-size", type=int, default=15_000)
    sp.add_argument("--replicate", type=int, default=0)
    sp.add_argument("--seed", type=int, default=2024)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("run", help="run a method over a directory of batch files")
    sp.add_argument("--input", required=True, help="directory with batch_*.csv")
    sp.add_argument("--out", required=True, help="report directory")
    sp.add_argument("--checkpoint", help="checkpoint file, rewritten after every batch")
    sp.add_argument("--resume", action="store_true", help="continue from --checkpoint")
    _add_run_options(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("evaluate", help="score a run against truth.csv and test.csv")
    sp.add_argument("--run", required=True)
    sp.add_argument("--truth", required=True)
    sp.add_argument("--replicate", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("oracle", help="exact enumeration of the linear-surrogate posterior")
    sp.add_argument("--input", required=True)
    sp.add_argument("--out", required=True)
    _add_run_options(sp)
    sp.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
