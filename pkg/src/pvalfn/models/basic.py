"""One-parameter textbook models with exact p-value functions."""

from __future__ import annotations

import math

import numpy as np

from pvalfn import rng
from pvalfn.models.base import DataSet, Interval, Model, ModelError, PivotKind
from pvalfn.numerics import (
    Bracket,
    OptimizerSettings,
    beta_n1_cdf,
    chisq1_sf,
    find_root,
    gamma_cdf,
    gamma_sf,
)

_LOG_2PI = math.log(2.0 * math.pi)
_ROOT_SETTINGS = OptimizerSettings(max_iters=400, x_tol=1e-14, f_tol=1e-14)

# Relative slack when comparing log statistics. Mathematically tied values
# (e.g. binomial counts k and n - k at theta = 1/2) can differ in the last
# bits; treating them as ties errs on the conservative side.
TIE_RTOL = 1e-12


def _theta0(theta) -> np.ndarray:
    return np.asarray(theta, dtype=float)[..., 0]


class NormalKnownVariance(Model):
    """iid N(theta, sigma^2) with sigma known (1 by default)."""

    name = "normal-known-var"
    labels = ("theta",)
    interest_dim = 1
    pivot = PivotKind.FULL
    bounds = (Interval(),)

    def __init__(self, sigma: float = 1.0, n_obs: int | None = None):
        if not sigma > 0:
            raise ModelError(f"sigma must be positive, got {sigma}")
        self.sigma = float(sigma)
        self.n_obs = n_obs

    def default_n_obs(self):
        return self.n_obs

    def draw(self, theta, seed, count, n_obs, start=0):
        z = rng.normals(seed, count, n_obs, start)
        return (theta[0] + self.sigma * z)[:, :, None]

    def suff(self, obs):
        return np.column_stack([np.full(obs.shape[0], obs.shape[1], dtype=float), obs[:, :, 0].mean(axis=1)])

    def loglik_suff(self, theta, s):
        n, ybar = s[..., 0], s[..., 1]
        return -0.5 * n * (ybar - _theta0(theta)) ** 2 / self.sigma**2

    def mle_suff(self, s):
        return s[:, 1:2].copy()

    def log_likelihood(self, theta, data):
        th = self.check_theta(theta)[0]
        y = data.obs[:, 0]
        return float(
            -0.5 * data.n * (_LOG_2PI + 2.0 * math.log(self.sigma))
            - 0.5 * np.sum((y - th) ** 2) / self.sigma**2
        )

    def moment_start(self, data):
        return np.array([data.obs[:, 0].mean()])

    def analytic_pvalue(self, theta, data):
        th = self.check_theta(theta)[0]
        ybar = float(data.obs[:, 0].mean())
        # 2 log T = n (ybar - theta)^2 / sigma^2 is exactly ChiSq(1)
        return chisq1_sf(data.n * (ybar - th) ** 2 / self.sigma**2)


class Uniform(Model):
    """iid Unif(0, theta)."""

    name = "uniform"
    labels = ("theta",)
    interest_dim = 1
    pivot = PivotKind.FULL
    bounds = (Interval(0.0, math.inf),)

    def __init__(self, n_obs: int | None = None):
        self.n_obs = n_obs

    def default_n_obs(self):
        return self.n_obs

    def check_data(self, data):
        super().check_data(data)
        if np.any(data.obs < 0):
            raise ModelError("uniform(0, theta) data must be nonnegative")

    def draw(self, theta, seed, count, n_obs, start=0):
        return (theta[0] * rng.uniforms(seed, count, n_obs, start))[:, :, None]

    def suff(self, obs):
        y = obs[:, :, 0]
        return np.column_stack([np.full(y.shape[0], y.shape[1], dtype=float), y.max(axis=1), y.min(axis=1)])

    def loglik_suff(self, theta, s):
        th = _theta0(theta)
        n, ymax, ymin = s[..., 0], s[..., 1], s[..., 2]
        ok = (th >= ymax) & (ymin >= 0) & (th > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = -n * np.log(np.where(th > 0, th, 1.0))
        return np.where(ok, val, -np.inf)

    def mle_suff(self, s):
        return s[:, 1:2].copy()

    def log_likelihood(self, theta, data):
        th = self.check_theta(theta)[0]
        y = data.obs[:, 0]
        if y.max() > th or y.min() < 0:
            return -math.inf
        return -data.n * math.log(th)

    def moment_start(self, data):
        return np.array([data.obs[:, 0].max()])

    def analytic_pvalue(self, theta, data):
        th = self.check_theta(theta)[0]
        ymax = float(data.obs[:, 0].max())
        if th < ymax:
            return 0.0
        return beta_n1_cdf(ymax / th, data.n)

    def support_covers(self, theta_proposal, theta_target):
        return float(theta_proposal[0]) >= float(theta_target[0])


class Exponential(Model):
    """iid exponential with mean theta."""

    name = "exponential"
    labels = ("theta",)
    interest_dim = 1
    pivot = PivotKind.FULL
    bounds = (Interval(0.0, math.inf),)

    def __init__(self, n_obs: int | None = None):
        self.n_obs = n_obs

    def default_n_obs(self):
        return self.n_obs

    def check_data(self, data):
        super().check_data(data)
        if np.any(data.obs < 0):
            raise ModelError("exponential data must be nonnegative")
        if not np.any(data.obs > 0):
            raise ModelError("degenerate data: every observation is zero")

    def draw(self, theta, seed, count, n_obs, start=0):
        return (-theta[0] * np.log(rng.uniforms(seed, count, n_obs, start)))[:, :, None]

    def suff(self, obs):
        return np.column_stack([np.full(obs.shape[0], obs.shape[1], dtype=float), obs[:, :, 0].mean(axis=1)])

    def loglik_suff(self, theta, s):
        th = _theta0(theta)
        n, ybar = s[..., 0], s[..., 1]
        return -n * np.log(th) - n * ybar / th

    def mle_suff(self, s):
        return s[:, 1:2].copy()

    def log_likelihood(self, theta, data):
        th = self.check_theta(theta)[0]
        y = data.obs[:, 0]
        if np.any(y < 0):
            return -math.inf
        return float(-data.n * math.log(th) - y.sum() / th)

    def moment_start(self, data):
        return np.array([data.obs[:, 0].mean()])

    def analytic_pvalue(self, theta, data):
        """Exact p-value via the level sets of z -> z^-n e^{n(z-1)}.

        With z = ybar/theta, log T = n(z - 1 - log z), which is convex with
        minimum 0 at z = 1, so {T >= t} = (0, z_lo] U [z_hi, inf). The
        observed z is one of the two endpoints; the other is found by
        bisection, and n*Z ~ Gamma(n, 1) gives the two tail masses.
        """
        th = self.check_theta(theta)[0]
        n = data.n
        z_obs = float(data.obs[:, 0].mean()) / th
        if z_obs == 1.0:
            return 1.0
        if z_obs == 0.0:
            return 0.0
        g_obs = n * (z_obs - 1.0 - math.log(z_obs))

        def h(z):
            return n * (z - 1.0 - math.log(z)) - g_obs

        if z_obs < 1.0:
            z_lo = z_obs
            hi = 2.0
            while h(hi) < 0:
                hi *= 2.0
            z_hi = find_root(h, Bracket(1.0, hi, h(1.0), h(hi)), _ROOT_SETTINGS)
        else:
            z_hi = z_obs
            lo = 0.5
            while h(lo) < 0:
                lo *= 0.5
            z_lo = find_root(h, Bracket(lo, 1.0, h(lo), h(1.0)), _ROOT_SETTINGS)
        p = gamma_cdf(n * z_lo, n, 1.0) + gamma_sf(n * z_hi, n, 1.0)
        return min(max(p, 0.0), 1.0)


class Binomial(Model):
    """A single Bin(n_trials, theta) count."""

    name = "binomial"
    labels = ("theta",)
    interest_dim = 1
    pivot = PivotKind.NONE
    discrete = True
    bounds = (Interval(0.0, 1.0),)

    def __init__(self, n_trials: int):
        if int(n_trials) != n_trials or n_trials < 1:
            raise ModelError(f"n_trials must be a positive integer, got {n_trials}")
        self.n_trials = int(n_trials)
        ks = np.arange(self.n_trials + 1)
        self._log_choose = np.array(
            [math.lgamma(self.n_trials + 1) - math.lgamma(k + 1) - math.lgamma(self.n_trials - k + 1) for k in ks]
        )

    def default_n_obs(self):
        return 1

    def check_data(self, data):
        super().check_data(data)
        if data.n != 1:
            raise ModelError("binomial data is a single count")
        y = data.obs[0, 0]
        if y != int(y) or not 0 <= y <= self.n_trials:
            raise ModelError(f"count must be an integer in [0, {self.n_trials}], got {y}")
        nt = data.meta.get("n_trials")
        if nt is not None and int(nt) != self.n_trials:
            raise ModelError(f"data n_trials={nt} disagrees with model n_trials={self.n_trials}")

    def _wrap(self, arr):
        return DataSet(arr, {"n_trials": self.n_trials})

    def pmf(self, theta: float) -> np.ndarray:
        ks = np.arange(self.n_trials + 1)
        return np.exp(self._log_choose + _xlogy(ks, theta) + _xlogy(self.n_trials - ks, 1.0 - theta))

    def draw(self, theta, seed, count, n_obs=1, start=0):
        cdf = np.cumsum(self.pmf(float(theta[0])))
        u = rng.uniforms(seed, count, 1, start)[:, 0]
        k = np.minimum(np.searchsorted(cdf, u, side="left"), self.n_trials)
        return k.astype(float)[:, None, None]

    def suff(self, obs):
        y = obs[:, 0, 0]
        return np.column_stack([np.full(y.shape[0], float(self.n_trials)), y])

    def loglik_suff(self, theta, s):
        th = _theta0(theta)
        n, y = s[..., 0], s[..., 1]
        return _xlogy(y, th) + _xlogy(n - y, 1.0 - th)

    def mle_suff(self, s):
        return (s[:, 1] / s[:, 0])[:, None]

    def log_likelihood(self, theta, data):
        th = self.check_theta(theta)[0]
        self.check_data(data)
        y = int(data.obs[0, 0])
        return float(self._log_choose[y] + _xlogy(y, th) + _xlogy(self.n_trials - y, 1.0 - th))

    def moment_start(self, data):
        return np.array([data.obs[0, 0] / self.n_trials])

    def log_stat_all(self, theta: float) -> np.ndarray:
        """log T_theta(k) for every possible count k = 0..n_trials."""
        ks = np.arange(self.n_trials + 1, dtype=float)
        n = float(self.n_trials)
        return (_xlogy(ks, ks / n) + _xlogy(n - ks, (n - ks) / n)) - (
            _xlogy(ks, theta) + _xlogy(n - ks, 1.0 - theta)
        )

    def analytic_pvalue(self, theta, data):
        th = self.check_theta(theta)[0]
        self.check_data(data)
        y = int(data.obs[0, 0])
        log_t = np.maximum(self.log_stat_all(th), 0.0)
        keep = log_t >= log_t[y] - TIE_RTOL * (1.0 + abs(log_t[y]))
        if keep.all():
            return 1.0
        pmf = self.pmf(th)
        # sum the smaller side so p near 1 is not lost to rounding
        inside, outside = pmf[keep].sum(), pmf[~keep].sum()
        return float(min(inside if inside < 0.5 else 1.0 - outside / pmf.sum(), 1.0))


def _xlogy(x, y):
    """x * log(y) with the convention 0 * log(0) = 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = x * np.log(y)
    return np.where(x == 0, 0.0, out)
