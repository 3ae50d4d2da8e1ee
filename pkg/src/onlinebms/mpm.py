"""Median probability model selection and coefficient thresholding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .modelspace import ModelIndicator

MPM_THRESHOLD = 0.5


@dataclass(frozen=True, eq=False)
class MpmResult:
    inclusion_probs: np.ndarray
    gamma_mpm: ModelIndicator
    beta_mpm: np.ndarray

    @classmethod
    def build(cls, inclusion_probs, beta_full) -> MpmResult:
        probs = np.asarray(inclusion_probs, dtype=float)
        gamma = select_mpm(probs)
        return cls(probs, gamma, threshold_beta(beta_full, gamma))


def select_mpm(inclusion_probs) -> ModelIndicator:
    """Include exactly the predictors with inclusion probability >= 0.5."""
    probs = np.asarray(inclusion_probs, dtype=float).ravel()
    if np.any(~np.isfinite(probs)) or np.any((probs < 0.0) | (probs > 1.0)):
        raise ValueError("inclusion probabilities must lie in [0, 1]")
    return ModelIndicator(tuple(int(v) for v in probs >= MPM_THRESHOLD))


def threshold_beta(beta_full, gamma: ModelIndicator) -> np.ndarray:
    """Copy full-model coefficients on the selected support, zero the rest.

    The intercept (index 0) is always copied.
    """
    beta = np.asarray(beta_full, dtype=float)
    if beta.shape != (gamma.p + 1,):
        raise DimensionError(f"beta has shape {beta.shape}, model needs ({gamma.p + 1},)")
    keep = np.concatenate(([True], gamma.as_array()))
    return np.where(keep, beta, 0.0)
