"""Online Bayesian model selection for streaming logistic regression.

Model-space MC3 runs on a Gaussian linear surrogate whose BIC is computable
from constant-size streaming summaries; coefficients come from a renewable
full-model logistic estimate thresholded at the median probability model.
"""

from .errors import ConfigurationError, DataError, DimensionError
from .suffstats import BatchData, SuffStats
from .modelspace import ModelIndicator, ModelPrior, log_prior, log_posterior_unnorm
from .linear_bic import LinearFit, fit_linear, bic_of
from .sampler import SamplerConfig, ChainResult, propose, run_chain
from .renewable import LogisticFit, RenewableState, irls_fit, renew
from .mpm import MpmResult, select_mpm, threshold_beta

__all__ = [
    "BatchData",
    "ChainResult",
    "ConfigurationError",
    "DataError",
    "DimensionError",
    "LinearFit",
    "LogisticFit",
    "ModelIndicator",
    "ModelPrior",
    "MpmResult",
    "RenewableState",
    "SamplerConfig",
    "SuffStats",
    "bic_of",
    "fit_linear",
    "irls_fit",
    "log_posterior_unnorm",
    "log_prior",
    "propose",
    "renew",
    "run_chain",
    "select_mpm",
    "threshold_beta",
]
