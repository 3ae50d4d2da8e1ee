"""Constant-size streaming summaries for the Gaussian linear surrogate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DataError, DimensionError
from .modelspace import ModelIndicator, as_columns


@dataclass(frozen=True, eq=False)
class BatchData:
    """One batch of records.

    ``X`` carries the intercept as an explicit first column of ones, so
    ``X.shape[1] == p + 1``.
    """

    X: np.ndarray
    y: np.ndarray
    batch_index: int = 1

    def __post_init__(self):
        X = np.array(self.X, dtype=float, copy=True)
        y = np.array(self.y, dtype=float, copy=True).ravel()
        if X.ndim != 2 or X.shape[1] < 2:
            raise DimensionError("X must be 2-d with an intercept and at least one predictor")
        if X.shape[0] != y.shape[0]:
            raise DimensionError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if X.shape[0] < 1:
            raise DataError("a batch needs at least one record")
        if not np.all(X[:, 0] == 1.0):
            raise DataError("column 0 of X must be identically 1 (intercept)")
        if not np.all((y == 0.0) | (y == 1.0)):
            raise DataError("responses must be exactly 0 or 1")
        if self.batch_index < 1:
            raise ConfigurationError("batch_index is 1-based")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_predictors(cls, Z, y, batch_index: int = 1) -> BatchData:
        """Build a batch from the n x p predictor block, prepending the intercept."""
        Z = np.asarray(Z, dtype=float)
        if Z.ndim == 1:
            Z = Z[:, None]
        return cls(np.column_stack([np.ones(Z.shape[0]), Z]), y, batch_index)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1] - 1


def concat_batches(batches) -> tuple[np.ndarray, np.ndarray]:
    batches = list(batches)
    return np.vstack([b.X for b in batches]), np.concatenate([b.y for b in batches])


def symmetric_gram(X: np.ndarray) -> np.ndarray:
    """``X'X`` with the lower triangle mirrored from the upper one."""
    G = X.T @ X
    upper = np.triu(G)
    return upper + np.triu(upper, 1).T


@dataclass(frozen=True, eq=False)
class SuffStats:
    """Running ``(N, y'y, X'y, X'X)`` of every record ingested so far.

    Instances are immutable; :meth:`update` returns a new snapshot, so a
    snapshot handed to a sampler never changes underneath it.
    """

    p: int
    N: int
    yty: float
    Xty: np.ndarray
    XtX: np.ndarray

    def __post_init__(self):
        for arr in (self.Xty, self.XtX):
            arr.flags.writeable = False

    @classmethod
    def init(cls, p: int) -> SuffStats:
        if not isinstance(p, (int, np.integer)) or p < 1:
            raise ConfigurationError(f"predictor count must be a positive integer, got {p!r}")
        p = int(p)
        return cls(p, 0, 0.0, np.zeros(p + 1), np.zeros((p + 1, p + 1)))

    @classmethod
    def from_data(cls, X, y) -> SuffStats:
        """Single-pass moments of a full design matrix (the offline route)."""
        batch = BatchData(X, y)
        return cls.init(batch.p).update(batch)

    def update(self, d: BatchData) -> SuffStats:
        if d.p != self.p:
            raise DimensionError(f"batch has {d.p + 1} columns, stream expects {self.p + 1}")
        return SuffStats(
            p=self.p,
            N=self.N + d.n,
            yty=self.yty + float(d.y @ d.y),
            Xty=self.Xty + d.X.T @ d.y,
            XtX=self.XtX + symmetric_gram(d.X),
        )

    def extract_submodel(self, gamma: ModelIndicator) -> tuple[np.ndarray, np.ndarray]:
        """Principal submatrix of X'X and subvector of X'y for model ``gamma``."""
        cols = as_columns(gamma, self.p)
        return self.take(cols)

    def take(self, cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.XtX[np.ix_(cols, cols)], self.Xty[cols]

    @property
    def ybar(self) -> float:
        return self.Xty[0] / self.N

    def nbytes(self) -> int:
        return self.Xty.nbytes + self.XtX.nbytes + 24
