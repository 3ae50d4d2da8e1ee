import numpy as np
import pytest
from scipy.special import expit

from onlinebms.suffstats import BatchData


def logistic_batches(n_batches, n, p, beta=None, seed=0):
    """Batches from a logistic model with standard normal predictors."""
    gen = np.random.default_rng(seed)
    if beta is None:
        beta = np.zeros(p + 1)
    out = []
    for b in range(1, n_batches + 1):
        Z = gen.standard_normal((n, p))
        X = np.column_stack([np.ones(n), Z])
        y = (gen.random(n) < expit(X @ beta)).astype(float)
        out.append(BatchData(X, y, b))
    return out


def raw_moments(X, y):
    return X.T @ X, X.T @ y, float(y @ y)


@pytest.fixture
def make_batches():
    return logistic_batches


# one line per acceptance criterion, echoed in the terminal summary
CRITERIA_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
