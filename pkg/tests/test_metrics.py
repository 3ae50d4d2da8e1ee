import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from onlinebms.errors import DimensionError
from onlinebms.metrics import EVAL_HEADER, auc, evaluate, rmse_beta, tpr_fpr, write_eval_records
from onlinebms.modelspace import ModelIndicator


def pairwise_auc(scores, labels):
    pos, neg = scores[labels == 1], scores[labels == 0]
    total = 0.0
    for s in pos:
        total += np.sum(s > neg) + 0.5 * np.sum(s == neg)
    return total / (len(pos) * len(neg))


def test_rmse_cases():
    truth = np.array([0.1, -0.4, 0.0, 2.0])
    assert rmse_beta(truth, truth) == 0.0
    assert rmse_beta(truth + 0.1, truth) == pytest.approx(0.1, abs=1e-15)
    gen = np.random.default_rng(0)
    a, b = gen.normal(size=9), gen.normal(size=9)
    assert rmse_beta(a, b) == pytest.approx(math.sqrt(sum((u - v) ** 2 for u, v in zip(a, b)) / 9), rel=1e-14)
    with pytest.raises(DimensionError):
        rmse_beta(a, b[:-1])


def test_tpr_fpr_cases():
    truth = ModelIndicator((1, 1, 0, 0, 0))
    assert tpr_fpr(truth, truth) == (1.0, 0.0)
    assert tpr_fpr(ModelIndicator.null(5), truth) == (0.0, 0.0)
    assert tpr_fpr([1, 0, 1, 0, 0], truth) == (0.5, pytest.approx(1 / 3))
    assert math.isnan(tpr_fpr([1, 0], [0, 0])[0])
    assert math.isnan(tpr_fpr([1, 0], [1, 1])[1])


@given(st.integers(1, 10).flatmap(lambda p: st.tuples(
    arrays(bool, p), arrays(bool, p), st.permutations(range(p)))))
def test_tpr_fpr_permutation_invariant(args):
    sel, true, perm = args
    perm = list(perm)
    a = tpr_fpr(sel, true)
    b = tpr_fpr(sel[perm], true[perm])
    assert np.array_equal(np.array(a), np.array(b), equal_nan=True)


def test_auc_cases():
    labels = np.array([0, 0, 1, 1])
    assert auc([0.1, 0.2, 0.8, 0.9], labels) == 1.0
    assert auc(np.ones(4), labels) == 0.5
    assert math.isnan(auc([0.1, 0.2], [1, 1]))


def test_auc_matches_pairwise_oracle():
    gen = np.random.default_rng(7)
    labels = (gen.random(200) < 0.4).astype(int)
    # rounding creates many ties
    scores = np.round(gen.normal(size=200) + labels, 1)
    assert auc(scores, labels) == pytest.approx(pairwise_auc(scores, labels), abs=1e-12)


# scores on a coarse grid so the transform stays strictly increasing in floating point
@given(arrays(int, 30, elements=st.integers(-50, 50)), arrays(int, 30, elements=st.integers(0, 1)))
def test_auc_monotone_invariance(grid, labels):
    scores = grid / 10.0
    a = auc(scores, labels)
    b = auc(np.arctan(2 * scores + 1), labels)
    if math.isnan(a):
        assert math.isnan(b)
    else:
        assert a == pytest.approx(b, abs=1e-12)
        assert 0.0 <= a <= 1.0


def test_evaluate_and_write(tmp_path):
    beta_true = np.array([0.1, 0.1, 0.0])
    X = np.column_stack([np.ones(4), [-1.0, 1.0, -2.0, 2.0], np.zeros(4)])
    y = np.array([0, 1, 0, 1])
    rec = evaluate(3, "online_changing", [0.1, 0.2, 0.0], [1, 0], beta_true, X, y, 0.5, 2)
    assert (rec.tpr, rec.fpr, rec.auc) == (1.0, 0.0, 1.0)
    assert rec.rmse_beta == pytest.approx(math.sqrt(0.01 / 3))
    path = tmp_path / "eval.csv"
    write_eval_records(path, [rec])
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == EVAL_HEADER
    assert lines[1].startswith("3,online_changing,")
