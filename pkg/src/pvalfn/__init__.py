"""p-value functions from likelihood-ratio statistics.

Exact evaluation where the sampling distribution is known, Monte Carlo
elsewhere, and the Wilks chi-square approximation for comparison.
"""

from pvalfn.inference import (
    ConfidenceRegion,
    Method,
    ParamRegion,
    TestResult,
    comparison_intervals,
    composite_pvalue,
    confidence_region,
    marginal_confidence_region,
    marginal_pvalue_sup,
    max_pvalue_estimate,
    pvalue,
    pvalue_curve,
    test,
    wilks_pvalue,
)
from pvalfn.mc import Estimator, MonteCarloPlan, PValueCurve, mc_pvalue, mc_pvalue_curve
from pvalfn.models import DataSet, Model, ModelError, ParamPoint, builtin_model
from pvalfn.statistic import lr_stat, mle, profile_lr_stat

__all__ = [
    "ConfidenceRegion",
    "DataSet",
    "Estimator",
    "Method",
    "Model",
    "ModelError",
    "MonteCarloPlan",
    "PValueCurve",
    "ParamPoint",
    "ParamRegion",
    "TestResult",
    "builtin_model",
    "comparison_intervals",
    "composite_pvalue",
    "confidence_region",
    "lr_stat",
    "marginal_confidence_region",
    "marginal_pvalue_sup",
    "max_pvalue_estimate",
    "mc_pvalue",
    "mc_pvalue_curve",
    "mle",
    "profile_lr_stat",
    "pvalue",
    "pvalue_curve",
    "test",
    "wilks_pvalue",
]
