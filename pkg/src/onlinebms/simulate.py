"""Simulated logistic-regression streams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import rng
from .suffstats import BatchData

SCENARIO_SCALES = {1: 1.0, 2: 1.5, 3: 1.0 / 1.5}

# key-path tags separating batch streams from the test-set stream
_BATCH, _TEST = 1, 2


@dataclass(frozen=True)
class ScenarioSpec:
    """A stream design: intercept and the first ``n_signal`` slopes equal
    ``base * scale``, the remaining slopes are zero."""

    p: int = 80
    n_signal: int = 20
    base: float = 0.1
    scale: float = 1.0
    n_batches: int = 50
    batch_size: int = 300
    replicates: int = 25
    test_size: int = 15_000
    seed: int = 2024

    @property
    def beta_true(self) -> np.ndarray:
        beta = np.zeros(self.p + 1)
        beta[: self.n_signal + 1] = self.base * self.scale
        return beta

    @property
    def gamma_true(self) -> np.ndarray:
        return self.beta_true[1:] != 0


def scenario(k: int, **overrides) -> ScenarioSpec:
    """Scenario 1 (base), 2 (signals x1.5) or 3 (signals /1.5)."""
    return ScenarioSpec(scale=SCENARIO_SCALES[k], **overrides)


def draw_batch(spec: ScenarioSpec, n: int, gen: np.random.Generator, batch_index: int = 1) -> BatchData:
    Z = gen.standard_normal((n, spec.p))
    X = np.column_stack([np.ones(n), Z])
    y = (gen.random(n) < expit(X @ spec.beta_true)).astype(float)
    return BatchData(X, y, batch_index)


def generate_batch(spec: ScenarioSpec, batch_index: int, replicate: int = 0) -> BatchData:
    gen = rng.stream(spec.seed, _BATCH, replicate, batch_index)
    return draw_batch(spec, spec.batch_size, gen, batch_index)


def generate_test(spec: ScenarioSpec, replicate: int = 0) -> BatchData:
    return draw_batch(spec, spec.test_size, rng.stream(spec.seed, _TEST, replicate))


def generate_stream(spec: ScenarioSpec, replicate: int = 0) -> tuple[list[BatchData], BatchData]:
    """All batches of one replicate plus its test set."""
    batches = [generate_batch(spec, b, replicate) for b in range(1, spec.n_batches + 1)]
    return batches, generate_test(spec, replicate)
