"""Gaussian linear-model MLE, log-likelihood and BIC from sufficient statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .modelspace import ModelIndicator, as_columns, mask_columns
from .suffstats import SuffStats

SIGMA2_FLOOR = 1e-12
# Jitter multiples of trace/p_gamma tried in order.
JITTER_STEPS = (0.0, 1e-10, 1e-8)
# Smallest admissible squared Cholesky pivot, relative to trace/p_gamma.
RANK_TOL = 1e-12

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class LinearFit:
    alpha_hat: np.ndarray
    sigma2_hat: float
    loglik: float
    bic: float
    p_gamma: int

    @property
    def visitable(self) -> bool:
        return math.isfinite(self.loglik)


def _sentinel(p_gamma: int) -> LinearFit:
    return LinearFit(np.full(p_gamma, np.nan), math.inf, -math.inf, math.inf, p_gamma)


def _factor(A: np.ndarray):
    """Cholesky factor of ``A`` with jitter escalation, or None if rank deficient.

    A factorization is accepted only when its smallest squared pivot clearly
    exceeds both the rank tolerance and the jitter that was added, so jitter
    can rescue rounding failures but never masks genuine collinearity.
    """
    k = A.shape[0]
    scale = float(np.trace(A)) / k
    if not (scale > 0 and math.isfinite(scale)):
        return None
    eye = np.eye(k)
    for step in JITTER_STEPS:
        jitter = step * scale
        try:
            c, lower = cho_factor(A + jitter * eye if jitter else A, lower=True, check_finite=False)
        except LinAlgError:
            continue
        pivots = np.diag(c) ** 2
        if pivots.min() > max(RANK_TOL * scale, 100.0 * jitter):
            return c, lower
    return None


def fit_moments(XtX_g: np.ndarray, Xty_g: np.ndarray, yty: float, N: int) -> LinearFit:
    p_gamma = Xty_g.shape[0]
    if N < p_gamma + 1:
        return _sentinel(p_gamma)
    factor = _factor(XtX_g)
    if factor is None:
        return _sentinel(p_gamma)
    alpha = cho_solve(factor, Xty_g, check_finite=False)
    rss = yty - float(alpha @ Xty_g)
    sigma2 = max(rss / N, SIGMA2_FLOOR)
    loglik = -0.5 * N * _LOG_2PI - 0.5 * N * math.log(sigma2) - 0.5 * N
    bic = -2.0 * loglik + p_gamma * math.log(N)
    return LinearFit(alpha, sigma2, loglik, bic, p_gamma)


def fit_linear(s: SuffStats, gamma: ModelIndicator) -> LinearFit:
    """MLE of the linear surrogate for model ``gamma`` using only ``s``.

    ``sigma2_hat`` uses the MLE denominator N and is floored at
    ``SIGMA2_FLOOR``. The penalty counts regression coefficients only
    (intercept included), not the error variance. Rank-deficient models and
    streams with ``N < p_gamma + 1`` return a sentinel fit with
    ``loglik = -inf``.
    """
    cols = as_columns(gamma, s.p)
    return fit_moments(*s.take(cols), s.yty, s.N)


def bic_of(s: SuffStats, gamma: ModelIndicator, cache: BicCache | None = None) -> float:
    if cache is not None:
        if cache.stats is not s:
            raise ValueError("BIC cache is bound to a different SuffStats snapshot")
        return cache(gamma.mask)
    return fit_linear(s, gamma).bic


class BicCache:
    """Memoized BIC by model bitmask for one frozen SuffStats snapshot.

    A cache never outlives its snapshot: a new snapshot (after an update)
    needs a new cache, which is what keeps the cache from going stale.
    """

    def __init__(self, stats: SuffStats):
        self.stats = stats
        self._bic: dict[int, float] = {}
        self.evaluations = 0

    def fit(self, mask: int) -> LinearFit:
        cols = mask_columns(mask, self.stats.p)
        return fit_moments(*self.stats.take(cols), self.stats.yty, self.stats.N)

    def __call__(self, mask: int) -> float:
        bic = self._bic.get(mask)
        if bic is None:
            self.evaluations += 1
            bic = self.fit(mask).bic
            self._bic[mask] = bic
        return bic

    def __len__(self) -> int:
        return len(self._bic)
