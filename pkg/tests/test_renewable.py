import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from onlinebms.errors import ConfigurationError
from onlinebms.renewable import (
    RenewableState,
    information,
    irls_fit,
    loglik,
    renew,
    score,
)
from onlinebms.suffstats import BatchData, concat_batches

from conftest import logistic_batches


def stream_fit(batches, window=1):
    X, y = concat_batches(batches[:window])
    state, _ = RenewableState.from_window(X, y)
    for b in batches[window:]:
        state = renew(state, b)
    return state


def offline(batches):
    return irls_fit(*concat_batches(batches)).beta


def test_all_equal_y_with_ridge_is_finite():
    gen = np.random.default_rng(0)
    X = np.column_stack([np.ones(50), gen.normal(size=(50, 3))])
    fit = irls_fit(X, np.ones(50), ridge_lambda=1.0)
    assert fit.converged and np.all(np.isfinite(fit.beta))
    assert fit.beta[0] > 0 and abs(fit.beta[0]) > np.max(np.abs(fit.beta[1:]))


def test_null_truth_large_sample():
    (b,) = logistic_batches(1, 10_000, 5, seed=3)
    fit = irls_fit(b.X, b.y)
    assert fit.converged
    assert np.max(np.abs(fit.beta)) <= 0.1


def test_gradient_at_solution():
    (b,) = logistic_batches(1, 800, 6, beta=np.r_[0.2, 0.5, -0.5, 0, 0.3, 0, 0], seed=4)
    fit = irls_fit(b.X, b.y)
    assert fit.converged
    assert np.max(np.abs(score(b.X, b.y, fit.beta))) <= 1e-8
    ridge = irls_fit(b.X, b.y, ridge_lambda=2.0)
    assert np.max(np.abs(score(b.X, b.y, ridge.beta) - 2.0 * ridge.beta)) <= 1e-8


def test_matches_generic_optimizer():
    (b,) = logistic_batches(1, 500, 4, beta=np.r_[-0.3, 0.8, 0, -0.4, 0.2], seed=5)
    res = minimize(lambda t: -loglik(b.X, b.y, t), np.zeros(5),
                   jac=lambda t: -score(b.X, b.y, t), method="BFGS", options={"gtol": 1e-10})
    assert np.max(np.abs(irls_fit(b.X, b.y).beta - res.x)) <= 1e-5


def test_separation_is_not_converged():
    x = np.linspace(-1, 1, 40)
    X = np.column_stack([np.ones(40), x])
    y = (x > 0).astype(float)
    assert not irls_fit(X, y).converged
    assert irls_fit(X, y, ridge_lambda=1.0).converged


def test_negative_ridge_rejected():
    with pytest.raises(ConfigurationError):
        irls_fit(np.ones((3, 1)), np.array([0.0, 1.0, 1.0]), ridge_lambda=-1)


def test_information_is_symmetric_psd():
    (b,) = logistic_batches(1, 100, 5, seed=1)
    info = information(b.X, np.full(6, 0.1))
    assert np.array_equal(info, info.T)
    assert np.linalg.eigvalsh(info).min() > 0


def test_first_renewal_from_empty_history_is_plain_newton():
    (b,) = logistic_batches(1, 400, 3, beta=np.r_[0, 0.5, 0, -0.5], seed=6)
    empty = RenewableState(np.zeros(4), np.zeros((4, 4)), 0)
    assert np.allclose(renew(empty, b).beta, irls_fit(b.X, b.y, beta0=np.zeros(4)).beta, atol=1e-9)


def test_step_size_shrinks_on_stationary_stream():
    beta = np.r_[0.1, 0.4, -0.3, 0.2, 0, 0]
    batches = logistic_batches(40, 300, 5, beta=beta, seed=7)
    state, _ = RenewableState.from_window(batches[0].X, batches[0].y)
    steps = []
    for b in batches[1:]:
        new = renew(state, b)
        steps.append(np.max(np.abs(new.beta - state.beta)))
        state = new
    early, late = np.mean(steps[:10]), np.mean(steps[-10:])
    assert late < early


def test_five_renewals_close_to_offline():
    beta = np.r_[0.1, np.full(5, 0.3), np.zeros(15)]
    batches = logistic_batches(6, 300, 20, beta=beta, seed=8)
    state = stream_fit(batches)
    assert np.max(np.abs(state.beta - offline(batches))) <= 1e-2


def test_empty_effect_batch_moves_intercept():
    beta = np.r_[0.2, 0.5, -0.5, 0.3]
    batches = logistic_batches(3, 500, 3, beta=beta, seed=9)
    state = stream_fit(batches, window=3)
    gen = np.random.default_rng(1)
    X = np.zeros((300, 4))
    X[:, 0] = 1.0
    y = (gen.random(300) < 0.8).astype(float)
    new = renew(state, BatchData(X, y, 4))
    delta = np.abs(new.beta - state.beta)
    assert delta[0] > 0.05
    assert np.max(delta[1:]) < 0.1 * delta[0]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_information_grows_in_loewner_order(seed):
    batches = logistic_batches(3, 80, 4, beta=np.r_[0, 0.5, 0, 0, -0.5], seed=seed)
    state, _ = RenewableState.from_window(batches[0].X, batches[0].y, ridge_lambda=0.5)
    for b in batches[1:]:
        new = renew(state, b)
        diff = new.info - state.info
        scale = np.abs(new.info).max()
        assert np.linalg.eigvalsh(diff).min() >= -1e-10 * scale
        assert np.array_equal(new.info, new.info.T)
        assert new.n_seen == state.n_seen + b.n
        state = new


def test_distance_to_offline_decreases_majority():
    beta = np.r_[0.1, np.full(5, 0.3), np.zeros(15)]
    wins = 0
    for seed in range(5):
        batches = logistic_batches(10, 300, 20, beta=beta, seed=100 + seed)
        state, _ = RenewableState.from_window(batches[0].X, batches[0].y)
        dist = {}
        for b in range(2, 11):
            state = renew(state, batches[b - 1])
            dist[b] = np.max(np.abs(state.beta - offline(batches[:b])))
        wins += dist[10] <= dist[2]
    assert wins >= 3


def test_renew_is_deterministic():
    batches = logistic_batches(2, 200, 4, beta=np.r_[0, 0.4, 0, 0, 0.2], seed=10)
    state, _ = RenewableState.from_window(batches[0].X, batches[0].y)
    a, b = renew(state, batches[1]), renew(state, batches[1])
    assert np.array_equal(a.beta, b.beta) and np.array_equal(a.info, b.info)


def test_non_convergence_keeps_previous_estimate():
    batches = logistic_batches(2, 200, 4, beta=np.r_[0, 0.4, 0, 0, 0.2], seed=11)
    state, _ = RenewableState.from_window(batches[0].X, batches[0].y)
    new = renew(state, batches[1], max_iter=0)
    assert not new.converged
    assert np.array_equal(new.beta, state.beta)
    assert np.allclose(new.info, state.info + information(batches[1].X, state.beta))
