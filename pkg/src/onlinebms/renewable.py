"""Logistic regression: IRLS and renewable (incremental Newton) estimation.

The renewable estimate after batch b maximizes

    l_b(beta) - 1/2 (beta - beta_prev)' J (beta - beta_prev)

where ``l_b`` is the current batch log-likelihood and ``J`` the information
accumulated over earlier batches at their own estimates. Historical raw
records are never needed; with ``J = 0`` this is an ordinary Newton fit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from .errors import ConfigurationError
from .suffstats import BatchData, symmetric_gram

TOL = 1e-8
MAX_ITER = 50
MAX_HALVINGS = 30
# |eta| beyond this gives fitted probabilities within 1e-13 of 0 or 1
SEPARATION_ETA = 30.0


def loglik(X: np.ndarray, y: np.ndarray, beta: np.ndarray) -> float:
    eta = X @ beta
    return float(y @ eta - np.logaddexp(0.0, eta).sum())


def score(X, y, beta) -> np.ndarray:
    return X.T @ (y - expit(X @ beta))


def information(X: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Observed (= expected, canonical link) information ``X' W X``."""
    pi = expit(X @ beta)
    w = pi * (1.0 - pi)
    return symmetric_gram(X * np.sqrt(w)[:, None])


@dataclass(frozen=True, eq=False)
class LogisticFit:
    beta: np.ndarray
    converged: bool
    iterations: int
    grad_norm: float
    loglik: float = float("nan")


def _newton(objective, grad_hess, beta0, tol, max_iter):
    """Damped Newton ascent with step halving.

    Returns ``(beta, converged, iterations, grad_norm, objective value)``.
    """
    beta = np.array(beta0, dtype=float)
    f = objective(beta)
    g, H = grad_hess(beta)
    gnorm = float(np.max(np.abs(g)))
    it = 0
    while gnorm > tol and it < max_iter:
        it += 1
        try:
            direction = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            return beta, False, it, gnorm, f
        t = 1.0
        for _ in range(MAX_HALVINGS):
            cand = beta + t * direction
            f_cand = objective(cand)
            # tolerate rounding-level decreases near the optimum
            if np.isfinite(f_cand) and f_cand >= f - 1e-10 * max(1.0, abs(f)):
                break
            t *= 0.5
        else:
            return beta, False, it, gnorm, f
        beta, f = cand, f_cand
        g, H = grad_hess(beta)
        gnorm = float(np.max(np.abs(g)))
    return beta, gnorm <= tol, it, gnorm, f


def irls_fit(X, y, ridge_lambda: float = 0.0, tol: float = TOL, max_iter: int = MAX_ITER,
             beta0=None) -> LogisticFit:
    """Newton-Raphson (IRLS) fit of the logistic model.

    ``ridge_lambda > 0`` adds independent N(0, 1/ridge_lambda) priors on all
    coefficients including the intercept and returns the posterior mode.
    Convergence means the (penalized) score has sup-norm at most ``tol``.
    Under separation with ``ridge_lambda = 0`` the score vanishes only as the
    coefficients diverge, so an unpenalized fit with numerically degenerate
    fitted probabilities is reported as unconverged.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if ridge_lambda < 0:
        raise ConfigurationError("ridge_lambda must be nonnegative")
    k = X.shape[1]
    if beta0 is None:
        beta0 = np.zeros(k)
        ybar = float(np.clip(y.mean(), 1e-3, 1 - 1e-3))
        beta0[0] = np.log(ybar / (1 - ybar))
    lam = float(ridge_lambda)
    ridge = lam * np.eye(k)

    def objective(b):
        return loglik(X, y, b) - 0.5 * lam * float(b @ b)

    def grad_hess(b):
        return score(X, y, b) - lam * b, information(X, b) + ridge

    beta, conv, it, gnorm, f = _newton(objective, grad_hess, beta0, tol, max_iter)
    if lam == 0.0 and np.max(np.abs(X @ beta)) > SEPARATION_ETA:
        conv = False
    return LogisticFit(beta, conv, it, gnorm, loglik(X, y, beta))


@dataclass(frozen=True, eq=False)
class RenewableState:
    """Full-model renewable estimate and accumulated information.

    ``info`` includes ``ridge_lambda * I`` when the stream was initialized
    in normal-prior mode. ``converged``/``iterations`` describe the latest
    update.
    """

    beta: np.ndarray
    info: np.ndarray
    n_seen: int
    ridge_lambda: float = 0.0
    converged: bool = True
    iterations: int = 0

    @classmethod
    def from_window(cls, X, y, ridge_lambda: float = 0.0, tol: float = TOL,
                    max_iter: int = MAX_ITER) -> tuple[RenewableState, LogisticFit]:
        """Initialize from an IRLS fit on raw data (the access window)."""
        X = np.asarray(X, dtype=float)
        fit = irls_fit(X, y, ridge_lambda, tol, max_iter)
        info = information(X, fit.beta) + ridge_lambda * np.eye(X.shape[1])
        state = cls(fit.beta, info, X.shape[0], ridge_lambda, fit.converged, fit.iterations)
        return state, fit


def renew(state: RenewableState, d: BatchData | tuple, tol: float = TOL,
          max_iter: int = MAX_ITER) -> RenewableState:
    """Update the estimate with one new batch, using no historical records.

    On non-convergence the previous estimate is kept, information is
    accumulated at it, and the returned state carries ``converged=False``.
    """
    if isinstance(d, BatchData):
        X, y = d.X, d.y
    else:
        X, y = (np.asarray(a, dtype=float) for a in d)
    J = state.info
    beta_prev = state.beta

    def objective(b):
        diff = b - beta_prev
        return loglik(X, y, b) - 0.5 * float(diff @ J @ diff)

    def grad_hess(b):
        return score(X, y, b) + J @ (beta_prev - b), information(X, b) + J

    beta, conv, it, _, _ = _newton(objective, grad_hess, beta_prev, tol, max_iter)
    if not conv:
        beta = beta_prev
    info = J + information(X, beta)
    info = np.triu(info) + np.triu(info, 1).T
    return replace(state, beta=beta, info=info, n_seen=state.n_seen + X.shape[0],
                   converged=conv, iterations=it)
