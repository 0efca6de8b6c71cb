"""Inverse weighted Lindley lifetime distribution toolkit.

Evaluation, exact sampling, likelihood fits for complete and right-censored
data with analytic and bootstrap bias corrections, information-criteria
model comparison against the standard lifetime families, Kaplan-Meier and
TTT diagnostics, and a Monte Carlo engine for estimator studies.

The heavy kernels compile through numba when it is importable; setting the
environment variable ``IWLINDLEY_DISABLE_JIT=1`` before import selects the
pure-python fallbacks, which produce bit-identical results.
"""

from ._aircraft import aircraft_data
from .baselines import MODEL_IDS, ModelFit, criteria, fit_baseline
from .fit_censored import (CensoredScore, fit_acmle, fit_boot_censored,
                           fit_mle_censored, loglik_censored, score_censored)
from .fit_complete import (BiasMatrices, FitReport, LifetimeData,
                           bias_matrices, fisher_info, fit_boot, fit_cmle,
                           fit_mle, loglik)
from .iwl_core import (IwlParams, MixtureView, cdf, central_moment, hazard,
                       mean, mean_residual_life, moment, pdf, quantile,
                       sample, shannon_entropy, survival, variance)
from .nonparam import StepCurve, kaplan_meier, ttt_curve
from .simlab import (ExperimentConfig, SimResult, SimRow,
                     gen_censored_sample, run_experiment)

__version__ = "0.1.0"

__all__ = [
    "IwlParams", "MixtureView", "pdf", "cdf", "survival", "hazard",
    "quantile", "sample", "moment", "central_moment", "mean", "variance",
    "mean_residual_life", "shannon_entropy",
    "LifetimeData", "FitReport", "BiasMatrices", "loglik", "fit_mle",
    "fisher_info", "bias_matrices", "fit_cmle", "fit_boot",
    "CensoredScore", "loglik_censored", "score_censored", "fit_mle_censored",
    "fit_acmle", "fit_boot_censored",
    "ModelFit", "MODEL_IDS", "criteria", "fit_baseline", "aircraft_data",
    "StepCurve", "kaplan_meier", "ttt_curve",
    "ExperimentConfig", "SimResult", "SimRow", "gen_censored_sample",
    "run_experiment",
    "__version__",
]
