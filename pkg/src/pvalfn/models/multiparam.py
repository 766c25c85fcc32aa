"""Models with two or more parameters: shifted exponential, normal
random effects, and the bivariate normal correlation model."""

from __future__ import annotations

import math

import numpy as np

from pvalfn import rng
from pvalfn.models.base import DataSet, Interval, Model, ModelError, PivotKind, as_batch
from pvalfn.numerics import minimize_1d_batch

_LOG_2PI = math.log(2.0 * math.pi)


class ShiftedExponential(Model):
    """iid with density beta^-1 exp(-(y - mu)/beta) on y >= mu."""

    name = "shifted-exponential"
    labels = ("mu", "beta")
    interest_dim = 2
    pivot = PivotKind.FULL
    bounds = (Interval(), Interval(0.0, math.inf))

    def __init__(self, n_obs: int | None = None):
        self.n_obs = n_obs

    def default_n_obs(self):
        return self.n_obs

    def check_data(self, data):
        super().check_data(data)
        if data.n < 2:
            raise ModelError("shifted exponential needs at least two observations")

    def draw(self, theta, seed, count, n_obs, start=0):
        u = rng.uniforms(seed, count, n_obs, start)
        return (theta[0] - theta[1] * np.log(u))[:, :, None]

    def suff(self, obs):
        y = obs[:, :, 0]
        n = np.full(y.shape[0], y.shape[1], dtype=float)
        return np.column_stack([n, y.min(axis=1), y.mean(axis=1)])

    def loglik_suff(self, theta, s):
        mu, beta = as_batch(theta)
        n, ymin, ybar = s[..., 0], s[..., 1], s[..., 2]
        val = -n * np.log(beta) - n * (ybar - mu) / beta
        return np.where(mu <= ymin, val, -np.inf)

    def mle_suff(self, s):
        return np.column_stack([s[:, 1], s[:, 2] - s[:, 1]])

    def log_likelihood(self, theta, data):
        mu, beta = self.check_theta(theta)
        y = data.obs[:, 0]
        if y.min() < mu:
            return -math.inf
        return float(-data.n * math.log(beta) - np.sum(y - mu) / beta)

    def moment_start(self, data):
        y = data.obs[:, 0]
        return np.array([y.min(), y.mean() - y.min()])

    def to_unconstrained(self, theta):
        return np.array([theta[0], math.log(theta[1])])

    def from_unconstrained(self, v):
        return np.array([v[0], math.exp(v[1])])

    def support_covers(self, theta_proposal, theta_target):
        return float(theta_proposal[0]) <= float(theta_target[0])


class NormalRandomEffects(Model):
    """Y_i ~ N(lambda, sigma_i^2 + psi^2) independently, sigma_i known.

    This is the marginal (non-hierarchical) form of the random-effects model
    with study means drawn from N(lambda, psi^2). ``psi >= 0`` is the
    interest parameter; ``lambda`` is a location nuisance parameter.
    """

    name = "normal-random-effects"
    labels = ("psi", "lambda")
    interest_dim = 1
    pivot = PivotKind.NUISANCE_FREE
    bounds = (Interval(0.0, math.inf, lo_closed=True), Interval())
    mle_is_closed_form = False

    # grid + golden-section settings for the row-wise maximization over psi
    GRID_POINTS = 17
    GOLDEN_ITERS = 32
    CHUNK = 8192

    def __init__(self, sigma):
        sig = np.asarray(sigma, dtype=float).ravel()
        if sig.size < 2 or np.any(sig <= 0):
            raise ModelError("random-effects model needs >= 2 positive known sigma_i")
        self.sigma = sig
        self.sigma2 = sig**2

    def default_n_obs(self):
        return self.sigma.size

    def check_data(self, data):
        super().check_data(data)
        if data.n != self.sigma.size:
            raise ModelError(f"expected {self.sigma.size} observations, got {data.n}")
        meta_sigma = data.meta.get("sigma")
        if meta_sigma is not None and not np.allclose(meta_sigma, self.sigma):
            raise ModelError("dataset sigma_i disagree with the model constants")

    def _wrap(self, arr):
        return DataSet(arr, {"sigma": self.sigma.copy()})

    def draw(self, theta, seed, count, n_obs=None, start=0):
        if n_obs is not None and n_obs != self.sigma.size:
            raise ModelError(f"sample size is fixed at {self.sigma.size} by the known sigma_i")
        psi, lam = theta
        z = rng.normals(seed, count, self.sigma.size, start)
        return (lam + np.sqrt(self.sigma2 + psi**2) * z)[:, :, None]

    def suff(self, obs):
        return obs[:, :, 0].copy()

    def loglik_suff(self, theta, s):
        psi, lam = as_batch(theta)
        psi = np.asarray(psi)[..., None]
        lam = np.asarray(lam)[..., None]
        v = self.sigma2 + psi**2
        return -0.5 * np.sum(np.log(v) + (s - lam) ** 2 / v, axis=-1)

    def profile_nuisance_suff(self, psi, s):
        # psi: scalar, (M,) or (M, 1) alongside s of shape (n,) or (M, n)
        psi = np.asarray(psi, dtype=float)
        if psi.ndim == s.ndim:
            psi = psi[..., 0]
        w = 1.0 / (self.sigma2 + psi[..., None] ** 2)
        lam = np.sum(w * s, axis=-1) / np.sum(w, axis=-1)
        return np.broadcast_to(lam, s.shape[:-1])[..., None].copy()

    def _profile_ll(self, psi: np.ndarray, s: np.ndarray) -> np.ndarray:
        # psi broadcastable against s[..., 0]
        v = self.sigma2 + psi[..., None] ** 2
        w = 1.0 / v
        lam = np.sum(w * s, axis=-1) / np.sum(w, axis=-1)
        return -0.5 * np.sum(np.log(v) + (s - lam[..., None]) ** 2 * w, axis=-1)

    def mle_suff(self, s):
        out = np.empty((s.shape[0], 2))
        for lo in range(0, s.shape[0], self.CHUNK):
            out[lo : lo + self.CHUNK] = self._mle_rows(s[lo : lo + self.CHUNK])
        return out

    def _mle_rows(self, s):
        m = s.shape[0]
        span = s.max(axis=1) - s.min(axis=1) + 1e-12
        frac = np.linspace(0.0, 1.0, self.GRID_POINTS)
        grid = span[:, None] * frac[None, :]
        ll = self._profile_ll(grid, s[:, None, :])
        k = np.argmax(ll, axis=1)
        step = span / (self.GRID_POINTS - 1)
        lo = np.maximum(grid[np.arange(m), k] - step, 0.0)
        hi = grid[np.arange(m), k] + step
        x, fx = minimize_1d_batch(lambda p: -self._profile_ll(p, s), lo, hi, self.GOLDEN_ITERS)
        best_grid = ll[np.arange(m), k]
        psi = np.where(-fx >= best_grid, x, grid[np.arange(m), k])
        lam = self.profile_nuisance_suff(psi, s)[:, 0]
        return np.column_stack([psi, lam])

    def log_likelihood(self, theta, data):
        psi, lam = self.check_theta(theta)
        self.check_data(data)
        y = data.obs[:, 0]
        v = self.sigma2 + psi**2
        return float(-0.5 * np.sum(_LOG_2PI + np.log(v) + (y - lam) ** 2 / v))

    def moment_start(self, data):
        y = data.obs[:, 0]
        excess = max(float(np.var(y)) - float(np.mean(self.sigma2)), 0.0)
        return np.array([math.sqrt(excess) + 0.1 * float(np.std(y) + 1.0), float(np.mean(y))])

    def to_unconstrained(self, theta):
        return np.asarray(theta, dtype=float).copy()

    def from_unconstrained(self, v):
        # the likelihood depends on psi only through psi^2
        return np.array([abs(v[0]), v[1]])

    def reference_nuisance(self):
        return np.array([0.0])


class BivariateNormalCorrelation(Model):
    """iid bivariate normal; interest is the correlation rho.

    Parameters are ordered (rho, mu1, mu2, sigma1, sigma2).
    """

    name = "bivariate-normal-corr"
    labels = ("rho", "mu1", "mu2", "sigma1", "sigma2")
    interest_dim = 1
    pivot = PivotKind.NUISANCE_FREE
    obs_dim = 2
    bounds = (
        Interval(-1.0, 1.0),
        Interval(),
        Interval(),
        Interval(0.0, math.inf),
        Interval(0.0, math.inf),
    )

    def __init__(self, n_obs: int | None = None):
        self.n_obs = n_obs

    def default_n_obs(self):
        return self.n_obs

    def check_data(self, data):
        super().check_data(data)
        if data.n < 3:
            raise ModelError("need at least three pairs")
        if np.any(np.ptp(data.obs, axis=0) == 0):
            raise ModelError("degenerate data: a coordinate has zero variance")

    def draw(self, theta, seed, count, n_obs, start=0):
        rho, mu1, mu2, s1, s2 = theta
        z = rng.normals(seed, count, 2 * n_obs, start)
        z1, z2 = z[:, :n_obs], z[:, n_obs:]
        x = mu1 + s1 * z1
        y = mu2 + s2 * (rho * z1 + math.sqrt(1.0 - rho * rho) * z2)
        return np.stack([x, y], axis=2)

    def suff(self, obs):
        n = obs.shape[1]
        m = obs.mean(axis=1)
        c = obs - m[:, None, :]
        s11 = np.mean(c[:, :, 0] ** 2, axis=1)
        s22 = np.mean(c[:, :, 1] ** 2, axis=1)
        s12 = np.mean(c[:, :, 0] * c[:, :, 1], axis=1)
        return np.column_stack([np.full(obs.shape[0], float(n)), m[:, 0], m[:, 1], s11, s22, s12])

    def loglik_suff(self, theta, s):
        rho, mu1, mu2, sg1, sg2 = as_batch(theta)
        n, m1, m2, s11, s22, s12 = (s[..., i] for i in range(6))
        d1, d2 = m1 - mu1, m2 - mu2
        q = (
            (s11 + d1 * d1) / sg1**2
            - 2.0 * rho * (s12 + d1 * d2) / (sg1 * sg2)
            + (s22 + d2 * d2) / sg2**2
        )
        one_r2 = 1.0 - rho * rho
        return -n * np.log(sg1 * sg2) - 0.5 * n * np.log(one_r2) - 0.5 * n * q / one_r2

    @staticmethod
    def sample_correlation(s: np.ndarray) -> np.ndarray:
        return s[..., 5] / np.sqrt(s[..., 3] * s[..., 4])

    def mle_suff(self, s):
        r = self.sample_correlation(s)
        return np.column_stack([r, s[:, 1], s[:, 2], np.sqrt(s[:, 3]), np.sqrt(s[:, 4])])

    def profile_nuisance_suff(self, psi, s):
        # At fixed rho the variance MLEs are s_jj (1 - rho r) / (1 - rho^2).
        rho = np.asarray(psi, dtype=float)
        if rho.ndim == s.ndim:
            rho = rho[..., 0]
        r = self.sample_correlation(s)
        scale = (1.0 - rho * r) / (1.0 - rho * rho)
        lam = np.stack(
            [s[..., 1], s[..., 2], np.sqrt(s[..., 3] * scale), np.sqrt(s[..., 4] * scale)],
            axis=-1,
        )
        return lam

    def log_likelihood(self, theta, data):
        rho, mu1, mu2, s1, s2 = self.check_theta(theta)
        self.check_data(data)
        x = (data.obs[:, 0] - mu1) / s1
        y = (data.obs[:, 1] - mu2) / s2
        one_r2 = 1.0 - rho * rho
        q = (x * x - 2.0 * rho * x * y + y * y) / one_r2
        return float(
            -data.n * (_LOG_2PI + math.log(s1 * s2) + 0.5 * math.log(one_r2)) - 0.5 * np.sum(q)
        )

    def moment_start(self, data):
        return self.mle_suff(self.sufficient_reduce(data)[None, :])[0]

    def to_unconstrained(self, theta):
        rho, mu1, mu2, s1, s2 = theta
        return np.array([math.atanh(rho), mu1, mu2, math.log(s1), math.log(s2)])

    def from_unconstrained(self, v):
        return np.array([math.tanh(v[0]), v[1], v[2], math.exp(v[3]), math.exp(v[4])])

    def reference_nuisance(self):
        return np.array([0.0, 0.0, 1.0, 1.0])
