"""Numerical kernels: distribution functions, root finding, minimization."""

from pvalfn.numerics.optimize import minimize_1d, minimize_1d_batch, minimize_nd
from pvalfn.numerics.roots import (
    Bracket,
    BracketError,
    OptimizerSettings,
    find_root,
    shrink_bracket,
)
from pvalfn.numerics.special import (
    DomainError,
    beta_n1_cdf,
    beta_n1_quantile,
    chisq1_cdf,
    chisq1_sf,
    gamma_cdf,
    gamma_sf,
    normal_cdf,
    normal_quantile,
)

__all__ = [
    "Bracket",
    "BracketError",
    "DomainError",
    "OptimizerSettings",
    "beta_n1_cdf",
    "beta_n1_quantile",
    "chisq1_cdf",
    "chisq1_sf",
    "find_root",
    "gamma_cdf",
    "gamma_sf",
    "minimize_1d",
    "minimize_1d_batch",
    "minimize_nd",
    "normal_cdf",
    "normal_quantile",
    "shrink_bracket",
]
