"""Per-batch wall time of each method on one simulated stream.

Shows that the online method's per-batch cost stays flat after the access
window while an offline refit grows with the amount of data seen.

    python scripts/time_methods.py --p 20 --batches 30
"""

import argparse

import numpy as np

from onlinebms.pipeline import PipelineConfig, StreamRunner
from onlinebms.simulate import generate_batch, scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--p", type=int, default=20)
    ap.add_argument("--n-signal", type=int, default=5)
    ap.add_argument("--batches", type=int, default=30)
    ap.add_argument("--batch-size", type=int, default=300)
    ap.add_argument("--access-window", type=int, default=10)
    ap.add_argument("--methods", default="online_changing,online_fixed,offline")
    args = ap.parse_args()

    spec = scenario(1, p=args.p, n_signal=args.n_signal, n_batches=args.batches,
                    batch_size=args.batch_size)
    runners = {m: StreamRunner(PipelineConfig(method=m, access_window=args.access_window,
                                              screening_batches=args.access_window), spec.p)
               for m in args.methods.split(",")}
    times = {m: [] for m in runners}
    print(f"{'batch':>5}  {'N':>7}" + "".join(f"{m:>17}" for m in runners))
    for b in range(1, spec.n_batches + 1):
        batch = generate_batch(spec, b)
        for m, r in runners.items():
            times[m].append(r.process(batch).wall_time)
        print(f"{b:>5}  {b * spec.batch_size:>7}" + "".join(f"{times[m][-1]:>16.3f}s" for m in runners))

    post = slice(args.access_window, None)
    print("\nmean per-batch time after the access window:")
    for m in runners:
        print(f"  {m:<16} {np.mean(times[m][post]):.3f}s")
    if "offline" in times and "online_changing" in times:
        ratio = np.mean(times["offline"][-3:]) / np.mean(times["online_changing"][-3:])
        print(f"offline / online_changing over the last 3 batches: {ratio:.1f}x")


if __name__ == "__main__":
    main()
