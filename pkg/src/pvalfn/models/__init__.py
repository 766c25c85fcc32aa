"""Sampling models and the registry of built-in models."""

from __future__ import annotations

from pvalfn.models.base import (
    DataSet,
    Interval,
    Model,
    ModelError,
    ParamPoint,
    PivotKind,
)
from pvalfn.models.basic import Binomial, Exponential, NormalKnownVariance, Uniform
from pvalfn.models.multiparam import (
    BivariateNormalCorrelation,
    NormalRandomEffects,
    ShiftedExponential,
)

BUILTIN_MODELS = {
    "normal-known-var": NormalKnownVariance,
    "uniform": Uniform,
    "exponential": Exponential,
    "binomial": Binomial,
    "shifted-exponential": ShiftedExponential,
    "normal-random-effects": NormalRandomEffects,
    "bivariate-normal-corr": BivariateNormalCorrelation,
}

# constants each model cannot be built without
REQUIRED_CONSTANTS = {
    "binomial": ("n_trials",),
    "normal-random-effects": ("sigma",),
}


def builtin_model(name: str, constants: dict | None = None) -> Model:
    """Instantiate a built-in model by name.

    >>> builtin_model("binomial", {"n_trials": 20}).name
    'binomial'
    """
    constants = dict(constants or {})
    try:
        cls = BUILTIN_MODELS[name]
    except KeyError:
        known = ", ".join(sorted(BUILTIN_MODELS))
        raise ModelError(f"unknown model '{name}' (known: {known})") from None
    missing = [c for c in REQUIRED_CONSTANTS.get(name, ()) if c not in constants]
    if missing:
        raise ModelError(f"model '{name}' needs constants: {', '.join(missing)}")
    try:
        return cls(**constants)
    except TypeError as exc:
        raise ModelError(f"bad constants for '{name}': {exc}") from None


__all__ = [
    "BUILTIN_MODELS",
    "Binomial",
    "BivariateNormalCorrelation",
    "DataSet",
    "Exponential",
    "Interval",
    "Model",
    "ModelError",
    "NormalKnownVariance",
    "NormalRandomEffects",
    "ParamPoint",
    "PivotKind",
    "ShiftedExponential",
    "Uniform",
    "builtin_model",
]
