"""Model indicators, model-space priors and unnormalized posteriors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import betaln

from .errors import ConfigurationError, DimensionError


@dataclass(frozen=True, order=True)
class ModelIndicator:
    """Inclusion bit-vector over the p candidate predictors.

    The intercept is part of every model and has no bit. Instances are
    hashable and ordered lexicographically by their bits, and render as a
    0/1 string (``"10100"``).
    """

    bits: tuple[int, ...]
    size: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("model bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "size", sum(bits))

    @classmethod
    def null(cls, p: int) -> ModelIndicator:
        return cls((0,) * p)

    @classmethod
    def full(cls, p: int) -> ModelIndicator:
        return cls((1,) * p)

    @classmethod
    def from_string(cls, text: str) -> ModelIndicator:
        return cls(tuple(int(c) for c in text.strip()))

    @classmethod
    def from_mask(cls, mask: int, p: int) -> ModelIndicator:
        """Bit ``j`` of ``mask`` holds the indicator of predictor ``j + 1``."""
        return cls(tuple((mask >> j) & 1 for j in range(p)))

    @classmethod
    def from_included(cls, included: Iterable[int], p: int) -> ModelIndicator:
        """Build from 1-based predictor numbers."""
        bits = [0] * p
        for j in included:
            bits[j - 1] = 1
        return cls(tuple(bits))

    @property
    def p(self) -> int:
        return len(self.bits)

    @property
    def mask(self) -> int:
        m = 0
        for j, b in enumerate(self.bits):
            if b:
                m |= 1 << j
        return m

    def as_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=bool)

    def columns(self) -> np.ndarray:
        """Design-matrix columns of the model: intercept 0, then selected j."""
        return np.concatenate(([0], np.flatnonzero(self.as_array()) + 1))

    def flip(self, j: int) -> ModelIndicator:
        bits = list(self.bits)
        bits[j] = 1 - bits[j]
        return ModelIndicator(tuple(bits))

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


def mask_columns(mask: int, p: int) -> np.ndarray:
    cols = [0]
    j = 0
    while mask:
        if mask & 1:
            cols.append(j + 1)
        mask >>= 1
        j += 1
    if cols[-1] > p:
        raise DimensionError(f"model mask refers to predictor {cols[-1]} > p={p}")
    return np.array(cols, dtype=np.intp)


def as_columns(gamma: ModelIndicator | Sequence[int] | np.ndarray, p: int) -> np.ndarray:
    """Design columns for ``gamma`` given as a ModelIndicator or a 0/1 sequence."""
    if isinstance(gamma, ModelIndicator):
        if gamma.p != p:
            raise DimensionError(f"model has length {gamma.p}, expected {p}")
        return gamma.columns()
    bits = np.asarray(gamma).astype(bool).ravel()
    if bits.shape[0] != p:
        raise DimensionError(f"model has length {bits.shape[0]}, expected {p}")
    return np.concatenate(([0], np.flatnonzero(bits) + 1))


@dataclass(frozen=True)
class ModelPrior:
    """Prior over models: ``uniform`` (inclusion probability 1/2) or ``beta_binomial``."""

    kind: str = "uniform"
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        kind = self.kind.replace("-", "_")
        if kind not in ("uniform", "beta_binomial"):
            raise ConfigurationError(f"unknown model prior {self.kind!r}")
        if not (self.a > 0 and self.b > 0):
            raise ConfigurationError("Beta hyperparameters must be positive")
        object.__setattr__(self, "kind", kind)

    def log_prior_size(self, k: int, p: int) -> float:
        if self.kind == "uniform":
            return -p * math.log(2.0)
        return float(betaln(self.a + k, self.b + p - k) - betaln(self.a, self.b))

    def size_table(self, p: int) -> np.ndarray:
        """Log prior of a single model with k included predictors, k = 0..p."""
        return np.array([self.log_prior_size(k, p) for k in range(p + 1)])


def log_prior(gamma: ModelIndicator, prior: ModelPrior) -> float:
    return prior.log_prior_size(gamma.size, gamma.p)


def log_posterior_unnorm(gamma: ModelIndicator, s, prior: ModelPrior) -> float:
    """``-BIC(gamma)/2 + log p(gamma)``; ``-inf`` for unvisitable models."""
    from .linear_bic import bic_of

    bic = bic_of(s, gamma)
    if not math.isfinite(bic):
        return -math.inf
    return -0.5 * bic + log_prior(gamma, prior)


def normalize_log(values) -> np.ndarray:
    """Normalize log weights (log-sum-exp with a max shift; -inf entries get 0)."""
    values = np.asarray(values, dtype=float)
    top = values.max()
    if not np.isfinite(top):
        raise ValueError("no model has finite log weight")
    w = np.exp(values - top)
    return w / w.sum()
