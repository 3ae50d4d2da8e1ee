"""Replicated simulation runs: every method on the same streams, scored per batch."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .metrics import EvalRecord, evaluate
from .pipeline import PipelineConfig, StreamRunner
from .simulate import ScenarioSpec, generate_batch, generate_test


@dataclass(frozen=True)
class ExperimentConfig:
    spec: ScenarioSpec
    methods: tuple[str, ...] = ("online_changing", "online_fixed", "offline")
    pipeline: PipelineConfig = PipelineConfig()
    replicates: int | None = None  # defaults to spec.replicates


def run_replicate(cfg: ExperimentConfig, replicate: int) -> list[EvalRecord]:
    """Run every method over one replicate's stream; one record per (method, batch)."""
    spec = cfg.spec
    test = generate_test(spec, replicate)
    runners = {
        m: StreamRunner(replace(cfg.pipeline, method=m, seed=cfg.pipeline.seed + 1000 * replicate), spec.p)
        for m in cfg.methods
    }
    records = []
    for b in range(1, spec.n_batches + 1):
        batch = generate_batch(spec, b, replicate)
        for m, runner in runners.items():
            out = runner.process(batch)
            records.append(evaluate(b, m, out.beta, out.gamma, spec.beta_true, test.X, test.y,
                                    out.wall_time, replicate))
    return records


def run_experiment(cfg: ExperimentConfig, progress=None) -> list[EvalRecord]:
    n = cfg.replicates if cfg.replicates is not None else cfg.spec.replicates
    records = []
    for r in range(n):
        records.extend(run_replicate(cfg, r))
        if progress is not None:
            progress(r)
    return records


def summarize(records, batch: int | None = None) -> dict[str, dict[str, float]]:
    """Mean of each metric per method at ``batch`` (default: last batch)."""
    if batch is None:
        batch = max(r.batch for r in records)
    out = {}
    for m in dict.fromkeys(r.method for r in records):
        rows = [r for r in records if r.method == m and r.batch == batch]
        out[m] = {
            k: float(np.nanmean([getattr(r, k) for r in rows])) if rows else math.nan
            for k in ("rmse_beta", "tpr", "fpr", "auc", "wall_time")
        }
    return out
