"""Evaluation metrics: coefficient RMSE, selection TPR/FPR, and ROC AUC."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.stats import rankdata

from .errors import DimensionError


def rmse_beta(est, truth) -> float:
    est, truth = np.asarray(est, dtype=float), np.asarray(truth, dtype=float)
    if est.shape != truth.shape:
        raise DimensionError(f"shape mismatch {est.shape} vs {truth.shape}")
    return float(np.sqrt(np.mean((est - truth) ** 2)))


def tpr_fpr(selected, truth) -> tuple[float, float]:
    """True/false positive rates of a selected indicator against the truth.

    A rate whose denominator is empty (no signals, or no noise predictors)
    is undefined and returned as NaN.
    """
    sel = np.asarray(getattr(selected, "bits", selected), dtype=bool)
    true = np.asarray(getattr(truth, "bits", truth), dtype=bool)
    if sel.shape != true.shape:
        raise DimensionError(f"shape mismatch {sel.shape} vs {true.shape}")
    n_sig, n_noise = int(true.sum()), int((~true).sum())
    tpr = (sel & true).sum() / n_sig if n_sig else math.nan
    fpr = (sel & ~true).sum() / n_noise if n_noise else math.nan
    return float(tpr), float(fpr)


def auc(scores, labels) -> float:
    """Mann-Whitney AUC with midranks for ties; NaN for single-class labels."""
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise DimensionError("scores and labels differ in length")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        return math.nan
    ranks = rankdata(scores)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass
class EvalRecord:
    batch: int
    method: str
    rmse_beta: float
    tpr: float
    fpr: float
    auc: float
    wall_time: float = math.nan
    replicate: int = 0


EVAL_HEADER = [f.name for f in fields(EvalRecord)]


def evaluate(batch: int, method: str, beta_est, gamma, beta_true, test_X, test_y,
             wall_time: float = math.nan, replicate: int = 0) -> EvalRecord:
    gamma_true = np.asarray(beta_true)[1:] != 0
    tpr, fpr = tpr_fpr(gamma, gamma_true)
    return EvalRecord(
        batch=batch,
        method=method,
        rmse_beta=rmse_beta(beta_est, beta_true),
        tpr=tpr,
        fpr=fpr,
        auc=auc(np.asarray(test_X) @ np.asarray(beta_est), test_y),
        wall_time=wall_time,
        replicate=replicate,
    )


def write_eval_records(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=EVAL_HEADER)
        w.writeheader()
        for r in records:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in asdict(r).items()})
