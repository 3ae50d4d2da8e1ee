import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from onlinebms.baselines import enumerate_bma
from onlinebms.errors import DimensionError
from onlinebms.linear_bic import bic_of
from onlinebms.modelspace import ModelIndicator, ModelPrior, log_prior
from onlinebms.mpm import MpmResult, select_mpm, threshold_beta
from onlinebms.suffstats import SuffStats

from conftest import logistic_batches

probs_st = st.integers(1, 12).flatmap(lambda p: arrays(float, p, elements=st.floats(0, 1)))


def test_inclusive_boundary():
    assert select_mpm([0.9, 0.5, 0.49]) == ModelIndicator((1, 1, 0))
    assert select_mpm(np.zeros(4)) == ModelIndicator.null(4)


@pytest.mark.parametrize("bad", [[0.2, 1.1], [-0.01], [np.nan]])
def test_out_of_range_rejected(bad):
    with pytest.raises(ValueError):
        select_mpm(bad)


def test_threshold_examples():
    beta = np.array([0.3, -0.2, 0.7])
    assert np.array_equal(threshold_beta(beta, ModelIndicator((0, 1))), [0.3, 0.0, 0.7])
    assert np.array_equal(threshold_beta(beta, ModelIndicator.full(2)), beta)
    assert np.array_equal(threshold_beta(beta, ModelIndicator.null(2)), [0.3, 0.0, 0.0])
    with pytest.raises(DimensionError):
        threshold_beta(beta, ModelIndicator.null(3))


@given(probs_st)
def test_selection_matches_threshold(probs):
    g = select_mpm(probs)
    assert list(g.bits) == [int(v >= 0.5) for v in probs]


@given(probs_st, st.data())
def test_perturbation_without_crossing(probs, data):
    moved = np.array([
        data.draw(st.floats(0.5, 1.0) if v >= 0.5 else st.floats(0.0, 0.5, exclude_max=True))
        for v in probs
    ])
    assert select_mpm(moved) == select_mpm(probs)


@given(probs_st, st.data())
def test_threshold_idempotent_and_support(probs, data):
    p = probs.shape[0]
    beta = data.draw(arrays(float, p + 1, elements=st.floats(-5, 5).filter(lambda v: v != 0)))
    res = MpmResult.build(probs, beta)
    again = threshold_beta(res.beta_mpm, res.gamma_mpm)
    assert np.array_equal(again, res.beta_mpm)
    assert res.beta_mpm[0] == beta[0]
    assert list((res.beta_mpm[1:] != 0).astype(int)) == list(res.gamma_mpm.bits)


def test_mpm_from_direct_enumeration_p8():
    # inclusion probabilities by brute force over all 256 models, independent of enumerate_bma
    beta = np.r_[0.0, 0.35, 0.2, 0.12, 0.06, 0, 0, 0, 0]
    s = SuffStats.init(8)
    for b in logistic_batches(3, 300, 8, beta=beta, seed=17):
        s = s.update(b)
    prior = ModelPrior("beta_binomial")
    models = [ModelIndicator(bits) for bits in itertools.product((0, 1), repeat=8)]
    logw = np.array([-0.5 * bic_of(s, g) + log_prior(g, prior) for g in models])
    w = np.exp(logw - logw.max())
    w /= w.sum()
    incl = np.array([sum(wi for wi, g in zip(w, models) if g.bits[j]) for j in range(8)])
    expected = ModelIndicator(tuple(int(v >= 0.5) for v in incl))

    assert enumerate_bma(s, prior).mpm() == expected
    assert select_mpm(incl) == expected
