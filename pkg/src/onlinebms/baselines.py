"""Reference methods: exact enumeration, offline logistic MC3, and the
screen-then-fix online BMA competitor."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import ConfigurationError
from .linear_bic import fit_moments
from .modelspace import ModelIndicator, ModelPrior, mask_columns, normalize_log
from .mpm import select_mpm
from .renewable import (
    MAX_ITER,
    TOL,
    LogisticFit,
    RenewableState,
    information,
    irls_fit,
    loglik,
    renew,
)
from .sampler import ChainResult, SamplerConfig, run_mc3
from .suffstats import BatchData, SuffStats, concat_batches

ENUMERATION_CAP = 20


def fit_logistic_model(X, y, cols, ridge_lambda=0.0, tol=TOL, max_iter=MAX_ITER) -> LogisticFit:
    """IRLS fit of the submodel using design columns ``cols`` (raw data)."""
    return irls_fit(X[:, cols], y, ridge_lambda, tol, max_iter)


class LogisticScorer:
    """Logistic BIC by IRLS on aggregated raw data, memoized per bitmask.

    Models whose IRLS does not converge get BIC ``+inf`` and are never
    visited.
    """

    def __init__(self, X, y, ridge_lambda: float = 0.0, tol: float = TOL, max_iter: int = MAX_ITER):
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.p = self.X.shape[1] - 1
        self.N = self.X.shape[0]
        self.log_n = math.log(self.N)
        self.ridge_lambda = ridge_lambda
        self.tol, self.max_iter = tol, max_iter
        self.fits: dict[int, LogisticFit] = {}

    def fit(self, mask: int) -> LogisticFit:
        fit = self.fits.get(mask)
        if fit is None:
            cols = mask_columns(mask, self.p)
            fit = self.fits[mask] = fit_logistic_model(
                self.X, self.y, cols, self.ridge_lambda, self.tol, self.max_iter)
        return fit

    def __call__(self, mask: int) -> float:
        fit = self.fit(mask)
        if not fit.converged:
            return math.inf
        return -2.0 * fit.loglik + (mask.bit_count() + 1) * self.log_n

    def padded_beta(self, mask: int) -> np.ndarray:
        out = np.zeros(self.p + 1)
        out[mask_columns(mask, self.p)] = self.fit(mask).beta
        return out


@dataclass
class EnumerationResult:
    p: int
    masks: np.ndarray
    probs: np.ndarray
    bics: np.ndarray
    inclusion_probs: np.ndarray
    beta_bma: np.ndarray

    def prob_of(self, gamma: ModelIndicator) -> float:
        return float(self.probs[gamma.mask])

    def mpm(self) -> ModelIndicator:
        return select_mpm(self.inclusion_probs)


def enumerate_bma(source, prior: ModelPrior, model: str = "linear_bic") -> EnumerationResult:
    """Exact posterior over all 2^p models with BIC marginal likelihoods.

    ``source`` is a SuffStats (linear mode only) or an ``(X, y)`` pair. In
    linear mode the BMA coefficients are the surrogate's linear ones; in
    logistic mode every model is fitted by IRLS on the raw data.
    """
    if isinstance(source, SuffStats):
        if model != "linear_bic":
            raise ConfigurationError("logistic enumeration needs raw data")
        stats, raw = source, None
    else:
        X, y = source
        stats = SuffStats.from_data(X, y) if model == "linear_bic" else None
        raw = (np.asarray(X, dtype=float), np.asarray(y, dtype=float))
    p = stats.p if stats is not None else raw[0].shape[1] - 1
    if p > ENUMERATION_CAP:
        raise ConfigurationError(f"enumeration refused for p={p} > {ENUMERATION_CAP}")

    n_models = 1 << p
    table = prior.size_table(p)
    bics = np.empty(n_models)
    coefs = np.zeros((n_models, p + 1))
    scorer = LogisticScorer(*raw) if model == "logistic_bic" else None
    if model not in ("linear_bic", "logistic_bic"):
        raise ConfigurationError(f"unknown enumeration model {model!r}")
    for mask in range(n_models):
        cols = mask_columns(mask, p)
        if scorer is None:
            fit = fit_moments(*stats.take(cols), stats.yty, stats.N)
            bics[mask] = fit.bic
            if fit.visitable:
                coefs[mask, cols] = fit.alpha_hat
        else:
            bics[mask] = scorer(mask)
            if math.isfinite(bics[mask]):
                coefs[mask, cols] = scorer.fit(mask).beta
    sizes = np.array([m.bit_count() for m in range(n_models)])
    logpost = np.where(np.isfinite(bics), -0.5 * bics + table[sizes], -np.inf)
    probs = normalize_log(logpost)
    masks = np.arange(n_models)
    incl = np.array([probs[(masks >> j) & 1 == 1].sum() for j in range(p)])
    return EnumerationResult(
        p=p,
        masks=masks,
        probs=probs,
        bics=bics,
        inclusion_probs=incl,
        beta_bma=probs @ coefs,
    )


@dataclass
class OfflineResult:
    inclusion_probs: np.ndarray
    beta_bma: np.ndarray
    chain: ChainResult
    scorer: LogisticScorer

    @property
    def visited(self):
        return self.chain.visited


def offline_logistic_mc3(X, y, prior: ModelPrior, cfg: SamplerConfig,
                         warm: ModelIndicator | None = None, batch_index: int = 0,
                         ridge_lambda: float = 0.0) -> OfflineResult:
    """MC3 with logistic BIC on all raw data seen so far.

    The BMA estimate weights each visited model's IRLS coefficients by its
    share of retained iterations.
    """
    scorer = LogisticScorer(X, y, ridge_lambda)
    chain = run_mc3(scorer.p, scorer, prior, cfg, warm, batch_index)
    beta = np.zeros(scorer.p + 1)
    for mask, (count, _) in chain.visited.items():
        beta += (count / chain.kept) * scorer.padded_beta(mask)
    return OfflineResult(chain.inclusion_probs, beta, chain, scorer)


def stability_metric(beta_b, beta_bm1, X) -> float:
    """RMSE between fitted class probabilities under two coefficient vectors,
    over all historical rows ``X``."""
    X = np.asarray(X, dtype=float)
    diff = expit(X @ np.asarray(beta_b, dtype=float)) - expit(X @ np.asarray(beta_bm1, dtype=float))
    return float(np.sqrt(np.mean(diff * diff)))


@dataclass
class RetainedModel:
    """A frozen-set model with its renewable estimate and the running
    second-order approximation of its log-likelihood on all data so far."""

    mask: int
    cols: np.ndarray
    state: RenewableState
    loglik: float
    log_prior: float


@dataclass
class ScreeningState:
    active: bool = True
    batches_used: int = 0
    model_set: list[RetainedModel] = field(default_factory=list)
    prev_bma_beta: np.ndarray | None = None
    threshold: float = 0.02
    max_screening_batches: int = 10
    raw: list[BatchData] = field(default_factory=list)
    last_metric: float = math.nan
    prev_mpm: ModelIndicator | None = None
    N: int = 0


@dataclass
class FixedStepResult:
    inclusion_probs: np.ndarray
    beta_bma: np.ndarray
    gamma_mpm: ModelIndicator
    screening: bool
    metric: float
    acceptance_rate: float = math.nan
    chain: ChainResult | None = None


class OnlineFixedModelSel:
    """Screen with offline logistic MC3, then run online BMA on a frozen set.

    Screening ends after the first batch whose stability metric is at most
    ``threshold`` or after ``max_screening_batches`` batches, whichever
    comes first. The frozen set is the distinct models visited after burn-in
    in the final screening batch. Afterwards each retained model is renewed
    batch by batch and its log-likelihood is carried forward with a
    second-order expansion around the previous renewed estimate.
    """

    def __init__(self, p: int, prior: ModelPrior, cfg: SamplerConfig, threshold: float = 0.02,
                 max_screening_batches: int = 10, ridge_lambda: float = 0.0):
        if max_screening_batches < 1:
            raise ConfigurationError("max_screening_batches must be >= 1")
        self.p = p
        self.prior = prior
        self.cfg = cfg
        self.ridge_lambda = ridge_lambda
        self.state = ScreeningState(threshold=threshold, max_screening_batches=max_screening_batches)

    def step(self, batch: BatchData) -> FixedStepResult:
        st = self.state
        st.N += batch.n
        if st.active:
            return self._screen(batch)
        if not st.model_set:
            raise ConfigurationError("frozen model set is empty")
        return self._online(batch)

    def _screen(self, batch: BatchData) -> FixedStepResult:
        st = self.state
        st.raw.append(batch)
        X, y = concat_batches(st.raw)
        res = offline_logistic_mc3(X, y, self.prior, self.cfg, st.prev_mpm, batch.batch_index,
                                   self.ridge_lambda)
        metric = math.nan
        if st.prev_bma_beta is not None:
            metric = stability_metric(res.beta_bma, st.prev_bma_beta, X)
        st.batches_used += 1
        st.last_metric = metric
        st.prev_bma_beta = res.beta_bma
        gamma = select_mpm(res.inclusion_probs)
        st.prev_mpm = gamma
        if metric <= st.threshold or st.batches_used >= st.max_screening_batches:
            self._freeze(res, X)
        return FixedStepResult(res.inclusion_probs, res.beta_bma, gamma, True, metric,
                               res.chain.acceptance_rate, res.chain)

    def _freeze(self, res: OfflineResult, X: np.ndarray):
        st = self.state
        table = self.prior.size_table(self.p)
        retained = []
        for mask in sorted(res.visited):
            fit = res.scorer.fit(mask)
            cols = mask_columns(mask, self.p)
            info = information(X[:, cols], fit.beta) + self.ridge_lambda * np.eye(len(cols))
            state = RenewableState(fit.beta, info, X.shape[0], self.ridge_lambda)
            retained.append(RetainedModel(mask, cols, state, fit.loglik, float(table[mask.bit_count()])))
        st.model_set = retained
        st.active = False
        st.raw = []

    def _online(self, batch: BatchData) -> FixedStepResult:
        st = self.state
        log_n = math.log(st.N)
        logpost = np.empty(len(st.model_set))
        for i, m in enumerate(st.model_set):
            Xg = batch.X[:, m.cols]
            new = renew(m.state, (Xg, batch.y))
            delta = new.beta - m.state.beta
            m.loglik += -0.5 * float(delta @ m.state.info @ delta) + loglik(Xg, batch.y, new.beta)
            m.state = new
            bic = -2.0 * m.loglik + len(m.cols) * log_n
            logpost[i] = -0.5 * bic + m.log_prior
        w = normalize_log(logpost)
        beta = np.zeros(self.p + 1)
        incl = np.zeros(self.p)
        for wi, m in zip(w, st.model_set):
            beta[m.cols] += wi * m.state.beta
            incl[m.cols[1:] - 1] += wi
        incl = np.clip(incl, 0.0, 1.0)
        gamma = select_mpm(incl)
        return FixedStepResult(incl, beta, gamma, False, math.nan)

    def frozen_masks(self) -> list[int]:
        return [m.mask for m in self.state.model_set]
