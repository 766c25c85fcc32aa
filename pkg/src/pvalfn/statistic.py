"""Likelihood-ratio statistics, profile statistics and maximum likelihood.

Statistics use the reciprocal convention T = L(theta_hat) / L(theta) >= 1, so
large values are evidence against theta. Everything is carried on the log
scale: log T is finite in double precision long after T itself overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from pvalfn.models import DataSet, Model, ModelError, ParamPoint
from pvalfn.numerics import DomainError, minimize_nd

TIE_RTOL = 1e-12


@dataclass(frozen=True, order=True)
class StatValue:
    """A likelihood-ratio statistic; ordering compares ``log_value``."""

    log_value: float
    at_mle: bool = field(default=False, compare=False)

    def __post_init__(self):
        if math.isnan(self.log_value) or self.log_value < 0:
            raise ValueError(f"log statistic must be >= 0, got {self.log_value}")

    @property
    def value(self) -> float:
        try:
            return math.exp(self.log_value)
        except OverflowError:
            return math.inf

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.log_value)

    @classmethod
    def from_log(cls, log_t: float, tol: float = 1e-12) -> "StatValue":
        log_t = max(float(log_t), 0.0)
        return cls(log_t, at_mle=log_t <= tol)


@dataclass(frozen=True)
class ProfileResult:
    psi: ParamPoint
    nuisance: ParamPoint
    profiled_loglik: float


def exceeds(sim_log_t: np.ndarray, obs_log_t: float) -> np.ndarray:
    """Indicator T(sim) >= T(obs), with ties resolved as exceedances.

    A relative slack of ``TIE_RTOL`` treats last-bit differences between
    mathematically equal statistics as ties (the conservative direction).
    """
    if math.isinf(obs_log_t):
        return np.isinf(sim_log_t)
    return sim_log_t >= obs_log_t - TIE_RTOL * (1.0 + abs(obs_log_t))


# ---- maximum likelihood ------------------------------------------------------


def mle(model: Model, data: DataSet) -> ParamPoint:
    """Maximum likelihood estimate (closed form when the model has one)."""
    model.check_data(data)
    if model.has_closed_form_mle:
        return model.point(model.closed_form_mle(data))
    start = model.moment_start(data)

    def neg_ll(v):
        ll = model.log_likelihood(model.from_unconstrained(v), data)
        return -ll if math.isfinite(ll) else math.inf

    v_hat, _ = minimize_nd(neg_ll, model.to_unconstrained(start))
    return model.point(model.from_unconstrained(v_hat))


def _max_loglik(model: Model, data: DataSet) -> float:
    return model.log_likelihood(mle(model, data), data)


def lr_stat(model: Model, theta, data: DataSet) -> StatValue:
    """T_theta(y) = L(theta_hat) / L(theta); infinite off the support."""
    th = model.check_theta(theta)
    ll = model.log_likelihood(th, data)
    if ll == -math.inf:
        return StatValue(math.inf)
    return StatValue.from_log(_max_loglik(model, data) - ll)


def profile(model: Model, psi, data: DataSet, numeric: bool = False) -> ProfileResult:
    """Maximize the likelihood over the nuisance part at fixed ``psi``.

    Uses the model's closed-form maximizer unless ``numeric`` is set, in
    which case a simplex search over the nuisance coordinates is run (the
    independent route used to check closed forms).
    """
    k = model.interest_dim
    psi = np.atleast_1d(np.asarray(psi, dtype=float))
    if psi.shape != (k,):
        raise ModelError(f"{model.name} has {k} interest component(s), got {psi.shape}")
    if k == model.param_dim:
        th = model.check_theta(psi)
        return ProfileResult(model.point(th), ParamPoint((), ()), model.log_likelihood(th, data))

    if model.has_profile_nuisance and not numeric:
        s = model.sufficient_reduce(data)
        lam = np.asarray(model.profile_nuisance_suff(psi, s), dtype=float).ravel()
    else:
        lam = _numeric_nuisance(model, psi, data)
    th = model.check_theta(np.concatenate([psi, lam]))
    nuis = ParamPoint(tuple(float(x) for x in lam), model.labels[k:])
    interest = ParamPoint(tuple(float(x) for x in psi), model.labels[:k])
    return ProfileResult(interest, nuis, model.log_likelihood(th, data))


def _numeric_nuisance(model: Model, psi: np.ndarray, data: DataSet) -> np.ndarray:
    k = model.interest_dim
    start = model.moment_start(data)
    u_full = model.to_unconstrained(np.concatenate([psi, start[k:]]))
    u_psi = u_full[:k]

    def neg_ll(v):
        th = model.from_unconstrained(np.concatenate([u_psi, v]))
        th[:k] = psi
        ll = model.log_likelihood(th, data)
        return -ll if math.isfinite(ll) else math.inf

    v_hat, _ = minimize_nd(neg_ll, u_full[k:])
    return model.from_unconstrained(np.concatenate([u_psi, v_hat]))[k:]


def profile_lr_stat(model: Model, psi, data: DataSet, numeric: bool = False) -> StatValue:
    """T_psi(y) = sup L(psi, lambda) over everything / sup over lambda at psi."""
    if model.interest_dim < 1:
        raise ModelError(f"{model.name} declares no interest parameter")
    prof = profile(model, psi, data, numeric=numeric)
    if prof.profiled_loglik == -math.inf:
        return StatValue(math.inf)
    return StatValue.from_log(_max_loglik(model, data) - prof.profiled_loglik)


def statistic(model: Model, target, data: DataSet) -> StatValue:
    """LR statistic for a full parameter or profile statistic for an interest value."""
    target = np.atleast_1d(np.asarray(target, dtype=float))
    if target.size == model.param_dim:
        return lr_stat(model, target, data)
    return profile_lr_stat(model, target, data)


def shifted_exp_stat(theta, data: DataSet) -> StatValue:
    """Closed-form LR statistic of the shifted exponential model.

    With S = sum(y_i - y_(1)), T = {S / (n beta)}^-n exp{sum(y_i - mu)/beta - n}
    when y_(1) >= mu, and T = inf otherwise.
    """
    mu, beta = (float(x) for x in np.asarray(theta, dtype=float))
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    y = np.asarray(data.obs, dtype=float)[:, 0]
    n = y.size
    y1 = float(y.min())
    if y1 < mu:
        return StatValue(math.inf)
    s = float(np.sum(y - y1))
    log_t = -n * math.log(s / (n * beta)) + float(np.sum(y - mu)) / beta - n
    return StatValue.from_log(log_t)


# ---- batched statistics on sufficient statistics -----------------------------


def log_stat_batch(model: Model, theta, s: np.ndarray) -> np.ndarray:
    """log T_theta for every row of sufficient statistics ``s``."""
    theta = np.asarray(theta, dtype=float)
    ll_hat = model.loglik_suff(model.mle_suff(s), s)
    ll = model.loglik_suff(theta, s)
    with np.errstate(invalid="ignore"):
        out = np.where(ll == -np.inf, np.inf, ll_hat - ll)
    return np.maximum(out, 0.0)


def profile_log_stat_batch(model: Model, psi, s: np.ndarray) -> np.ndarray:
    """log T_psi (profile statistic) for every row of ``s``."""
    psi = np.atleast_1d(np.asarray(psi, dtype=float))
    m = s.shape[0]
    ll_hat = model.loglik_suff(model.mle_suff(s), s)
    if not model.has_profile_nuisance:
        raise ModelError(f"{model.name} has no vectorized profile maximizer")
    psi_rows = np.full(m, psi[0]) if psi.size == 1 else np.broadcast_to(psi, (m, psi.size))
    lam = np.asarray(model.profile_nuisance_suff(psi_rows, s)).reshape(m, -1)
    theta = np.column_stack([np.broadcast_to(psi, (m, psi.size)), lam])
    ll = model.loglik_suff(theta, s)
    with np.errstate(invalid="ignore"):
        out = np.where(ll == -np.inf, np.inf, ll_hat - ll)
    return np.maximum(out, 0.0)


def stat_batch(model: Model, target, s: np.ndarray) -> np.ndarray:
    target = np.atleast_1d(np.asarray(target, dtype=float))
    if target.size == model.param_dim:
        return log_stat_batch(model, target, s)
    return profile_log_stat_batch(model, target, s)
