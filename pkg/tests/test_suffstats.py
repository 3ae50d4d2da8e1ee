import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from onlinebms.errors import ConfigurationError, DataError, DimensionError
from onlinebms.modelspace import ModelIndicator
from onlinebms.suffstats import BatchData, SuffStats, concat_batches

from conftest import logistic_batches, raw_moments


@pytest.mark.parametrize("p", [1, 2, 80])
def test_init_is_zero(p):
    s = SuffStats.init(p)
    assert s.N == 0 and s.yty == 0.0
    assert s.Xty.shape == (p + 1,) and not s.Xty.any()
    assert s.XtX.shape == (p + 1, p + 1) and not s.XtX.any()


@pytest.mark.parametrize("p", [0, -3])
def test_init_rejects_bad_p(p):
    with pytest.raises(ConfigurationError):
        SuffStats.init(p)


def test_first_update_equals_batch_moments():
    (b,) = logistic_batches(1, 7, 3, seed=1)
    s = SuffStats.init(3).update(b)
    XtX, Xty, yty = raw_moments(b.X, b.y)
    assert s.N == 7
    np.testing.assert_allclose(s.XtX, XtX, rtol=0, atol=1e-12)
    np.testing.assert_allclose(s.Xty, Xty, rtol=0, atol=1e-12)
    assert s.yty == yty


def test_same_batch_twice_doubles_everything():
    (b,) = logistic_batches(1, 9, 4, seed=2)
    once = SuffStats.init(4).update(b)
    twice = once.update(b)
    assert twice.N == 2 * once.N
    assert twice.yty == 2 * once.yty
    assert np.array_equal(twice.Xty, 2 * once.Xty)
    assert np.array_equal(twice.XtX, 2 * once.XtX)


def test_three_batches_match_concatenation():
    batches = logistic_batches(3, 5, 2, seed=3)
    s = SuffStats.init(2)
    for b in batches:
        s = s.update(b)
    X, y = concat_batches(batches)
    XtX, Xty, yty = raw_moments(X, y)
    assert s.N == 15
    assert np.max(np.abs(s.XtX - XtX)) <= 1e-12
    assert np.max(np.abs(s.Xty - Xty)) <= 1e-12
    assert abs(s.yty - yty) <= 1e-12


def test_update_errors():
    s = SuffStats.init(3)
    (b,) = logistic_batches(1, 4, 2, seed=0)
    with pytest.raises(DimensionError):
        s.update(b)
    X = np.column_stack([np.ones(3), np.arange(3.0)])
    with pytest.raises(DataError):
        BatchData(X, [0, 1, 0.5])
    with pytest.raises(DataError):
        BatchData(np.column_stack([np.zeros(3), np.arange(3.0)]), [0, 1, 0])
    with pytest.raises(DimensionError):
        BatchData(X, [0, 1])


def test_extract_full_and_null():
    batches = logistic_batches(2, 10, 3, seed=4)
    s = SuffStats.init(3)
    for b in batches:
        s = s.update(b)
    A, v = s.extract_submodel(ModelIndicator.full(3))
    assert np.array_equal(A, s.XtX) and np.array_equal(v, s.Xty)
    A, v = s.extract_submodel(ModelIndicator.null(3))
    assert A.shape == (1, 1) and A[0, 0] == s.N
    assert v[0] == pytest.approx(sum(b.y.sum() for b in batches), abs=0)


def test_extract_p3_gamma_101_matches_reduced_design():
    batches = logistic_batches(2, 12, 3, seed=5)
    s = SuffStats.init(3)
    for b in batches:
        s = s.update(b)
    X, y = concat_batches(batches)
    Xr = X[:, [0, 1, 3]]
    A, v = s.extract_submodel(ModelIndicator((1, 0, 1)))
    np.testing.assert_allclose(A, Xr.T @ Xr, rtol=0, atol=1e-12)
    np.testing.assert_allclose(v, Xr.T @ y, rtol=0, atol=1e-12)


@pytest.mark.parametrize("p", [1, 3, 6])
def test_extract_exhaustive(p):
    batches = logistic_batches(3, 8, p, seed=p)
    s = SuffStats.init(p)
    for b in batches:
        s = s.update(b)
    X, y = concat_batches(batches)
    for bits in itertools.product((0, 1), repeat=p):
        cols = [0] + [j + 1 for j in range(p) if bits[j]]
        A, v = s.extract_submodel(ModelIndicator(bits))
        Xr = X[:, cols]
        assert np.max(np.abs(A - Xr.T @ Xr)) <= 1e-12
        assert np.max(np.abs(v - Xr.T @ y)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_batches=st.integers(2, 6), p=st.integers(1, 5),
       data=st.data())
def test_batch_order_independence(seed, n_batches, p, data):
    batches = logistic_batches(n_batches, 6, p, seed=seed)
    order = data.draw(st.permutations(range(n_batches)))
    a, b = SuffStats.init(p), SuffStats.init(p)
    for i in range(n_batches):
        a = a.update(batches[i])
        b = b.update(batches[order[i]])
    assert a.N == b.N
    scale = max(1.0, np.max(np.abs(a.XtX)))
    assert np.max(np.abs(a.XtX - b.XtX)) <= 1e-10 * scale
    assert np.max(np.abs(a.Xty - b.Xty)) <= 1e-10 * scale
    assert a.yty == b.yty


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), sizes=st.lists(st.integers(1, 20), min_size=1, max_size=8))
def test_intercept_entry_counts_rows_and_symmetry_is_exact(seed, sizes):
    gen = np.random.default_rng(seed)
    s = SuffStats.init(3)
    for n in sizes:
        X = np.column_stack([np.ones(n), gen.normal(size=(n, 3)) * 10])
        s = s.update(BatchData(X, gen.integers(0, 2, n)))
    assert s.XtX[0, 0] == s.N == sum(sizes)
    assert np.array_equal(s.XtX, s.XtX.T)
    assert 0 <= s.yty <= s.N and s.yty == s.Xty[0]
    assert np.linalg.eigvalsh(s.XtX).min() >= -1e-9 * np.trace(s.XtX)


def test_snapshots_are_immutable():
    s = SuffStats.init(2)
    with pytest.raises(ValueError):
        s.XtX[0, 0] = 1.0
