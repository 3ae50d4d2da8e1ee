"""MC3: Metropolis-Hastings over the model space with single-flip proposals.

The chain engine is generic over a BIC function of the model bitmask. The
online sampler plugs in :class:`~onlinebms.linear_bic.BicCache`, which only
reads the streaming summaries; the offline logistic baseline plugs in a
raw-data IRLS scorer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import rng as rng_mod
from .errors import ConfigurationError
from .linear_bic import BicCache
from .modelspace import ModelIndicator, ModelPrior
from .suffstats import SuffStats

WARM_STARTS = ("null_model", "previous_mpm", "random")
_BLOCK = 4096


@dataclass(frozen=True)
class SamplerConfig:
    """MC3 run settings.

    ``iterations`` counts every iteration including burn-in; inclusion
    probabilities average the ``iterations - burn_in`` retained states.
    """

    iterations: int = 12_000
    burn_in: int = 2_000
    seed: int = 0
    warm_start: str = "previous_mpm"
    visited_cap: int = 100_000

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigurationError("iterations must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ConfigurationError("need 0 <= burn_in < iterations")
        if self.warm_start not in WARM_STARTS:
            raise ConfigurationError(f"warm_start must be one of {WARM_STARTS}")
        if self.visited_cap < 1:
            raise ConfigurationError("visited_cap must be positive")

    @property
    def kept(self) -> int:
        return self.iterations - self.burn_in


def propose(gamma: ModelIndicator, rng: np.random.Generator) -> ModelIndicator:
    """Flip one uniformly chosen coordinate."""
    return gamma.flip(int(rng.integers(gamma.p)))


class SamplerState:
    """Mutable state of one chain.

    ``tally[j]`` counts retained iterations whose current model includes
    predictor ``j + 1``; it is accumulated run-length style on every move
    and is independent of the (bounded) ``visited`` map.
    """

    def __init__(self, p: int, current: int, current_log_post: float, current_bic: float,
                 rng: np.random.Generator, burn_in: int, visited_cap: int = 100_000):
        self.p = p
        self.current = current
        self.current_log_post = current_log_post
        self.current_bic = current_bic
        self.rng = rng
        self.burn_in = burn_in
        self.visited_cap = visited_cap
        self.iteration = 0
        self.proposals = 0
        self.accepted = 0
        self.tally = np.zeros(p, dtype=np.int64)
        self.visited: dict[int, list] = {}
        self.moves: list[tuple[int, int]] = []
        self._streak = 0
        self._flips = np.empty(0, dtype=np.int64)
        self._unif = np.empty(0)
        self._pos = 0

    def draw(self) -> tuple[int, float]:
        if self._pos >= len(self._flips):
            self._flips = self.rng.integers(self.p, size=_BLOCK)
            self._unif = self.rng.random(_BLOCK)
            self._pos = 0
        j, u = int(self._flips[self._pos]), float(self._unif[self._pos])
        self._pos += 1
        return j, u

    def flush(self):
        if self._streak:
            m, j = self.current, 0
            while m:
                if m & 1:
                    self.tally[j] += self._streak
                m >>= 1
                j += 1
            self._streak = 0

    def record(self):
        entry = self.visited.get(self.current)
        if entry is None:
            if len(self.visited) >= self.visited_cap:
                self._evict()
            self.visited[self.current] = [1, self.current_bic]
        else:
            entry[0] += 1
        self._streak += 1

    def _evict(self):
        # drop the least-visited tenth; tallies are kept separately
        n_drop = max(1, self.visited_cap // 10)
        order = sorted(self.visited.items(), key=lambda kv: kv[1][0])
        for mask, _ in order[:n_drop]:
            del self.visited[mask]

    @property
    def kept(self) -> int:
        return max(0, self.iteration - self.burn_in)


def step(state: SamplerState, score: Callable[[int], tuple[float, float]]) -> SamplerState:
    """One MC3 iteration; ``score(mask)`` returns ``(log posterior, BIC)``.

    The proposal is symmetric, so a move is accepted with probability
    ``min(1, exp(delta))`` where ``delta`` is the log-posterior difference.
    Proposals with ``-inf`` log posterior are never accepted.
    """
    j, u = state.draw()
    prop = state.current ^ (1 << j)
    lp, bic = score(prop)
    delta = lp - state.current_log_post
    state.proposals += 1
    past_burn = state.iteration >= state.burn_in
    if delta >= 0.0 or u < math.exp(delta):
        if past_burn:
            state.flush()
        state.current, state.current_log_post, state.current_bic = prop, lp, bic
        state.accepted += 1
        state.moves.append((state.iteration, prop))
    if past_burn:
        state.record()
    state.iteration += 1
    return state


def acceptance_probability(log_post_current: float, log_post_proposed: float) -> float:
    if log_post_proposed == -math.inf:
        return 0.0
    return min(1.0, math.exp(log_post_proposed - log_post_current))


@dataclass
class ChainResult:
    p: int
    inclusion_probs: np.ndarray
    visited: dict[int, list]
    moves: list[tuple[int, int]]
    start: int
    final: int
    acceptance_rate: float
    kept: int
    evaluations: int
    extras: dict = field(default_factory=dict)

    def top_models(self, k: int = 10) -> list[tuple[ModelIndicator, float, float]]:
        """Most-visited models with estimated posterior probability and BIC.

        Ties in visit count are broken by the model's lexicographic order.
        """
        items = [(ModelIndicator.from_mask(m, self.p), c, b) for m, (c, b) in self.visited.items()]
        items.sort(key=lambda t: (-t[1], t[0]))
        return [(g, c / self.kept, b) for g, c, b in items[:k]]

    def accepted_sequence(self) -> list[int]:
        return [m for _, m in self.moves]

    def report(self, batch_index: int, top_k: int = 10) -> dict:
        return {
            "batch": batch_index,
            "acceptance_rate": self.acceptance_rate,
            "inclusion_probs": self.inclusion_probs.copy(),
            "top_models": self.top_models(top_k),
        }


def run_mc3(p: int, bic_fn: Callable[[int], float], prior: ModelPrior, cfg: SamplerConfig,
            warm: ModelIndicator | None = None, batch_index: int = 0) -> ChainResult:
    """Run one chain of ``cfg.iterations`` steps.

    The random stream is keyed by ``(cfg.seed, batch_index)``, so the run is
    a deterministic function of its inputs.
    """
    table = prior.size_table(p)
    memo: dict[int, tuple[float, float]] = {}

    def score(mask: int) -> tuple[float, float]:
        hit = memo.get(mask)
        if hit is None:
            bic = bic_fn(mask)
            lp = -0.5 * bic + table[mask.bit_count()] if math.isfinite(bic) else -math.inf
            hit = memo[mask] = (lp, bic)
        return hit

    gen = rng_mod.stream(cfg.seed, batch_index)
    if cfg.warm_start == "random":
        start = int(sum(1 << j for j in np.flatnonzero(gen.random(p) < 0.5)))
    elif cfg.warm_start == "previous_mpm" and warm is not None:
        start = warm.mask
    else:
        start = 0
    lp, bic = score(start)
    if lp == -math.inf:
        start = 0
        lp, bic = score(0)
    if lp == -math.inf:
        raise ValueError("null model is not evaluable; not enough data for a chain")

    state = SamplerState(p, start, lp, bic, gen, cfg.burn_in, cfg.visited_cap)
    for _ in range(cfg.iterations):
        step(state, score)
    state.flush()
    return ChainResult(
        p=p,
        inclusion_probs=state.tally / cfg.kept,
        visited=state.visited,
        moves=state.moves,
        start=start,
        final=state.current,
        acceptance_rate=state.accepted / state.proposals,
        kept=cfg.kept,
        evaluations=len(memo),
    )


def run_chain(s: SuffStats, prior: ModelPrior, cfg: SamplerConfig,
              warm: ModelIndicator | None = None, batch_index: int = 0,
              cache: BicCache | None = None) -> ChainResult:
    """Online MC3 on the linear surrogate, reading only the summaries ``s``."""
    if cache is None:
        cache = BicCache(s)
    elif cache.stats is not s:
        raise ValueError("BIC cache is bound to a different SuffStats snapshot")
    return run_mc3(s.p, cache, prior, cfg, warm, batch_index)
