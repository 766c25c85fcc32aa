"""Monte Carlo evaluation of p-value functions.

Three estimators of p(theta) = P_theta{T_theta(Y) >= T_theta(y)}:

* ``plain``: simulate M datasets under theta. Replicate m always uses the
  seed-derived stream (base_seed, m), so curves over many theta values share
  common random numbers and the estimated curve is a deterministic function of
  theta.
* ``pivot-reuse``: when T_theta(Y) is a pivot, one set of M statistics
  simulated at a reference parameter serves every theta.
* ``importance``: one sample from a proposal model, reweighted by the density
  ratio p_theta / f for each theta.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from pvalfn.models import DataSet, Model, ModelError, PivotKind
from pvalfn.statistic import exceeds, mle, stat_batch

DEFAULT_M_CURVE = 10_000
DEFAULT_M_ENDPOINT = 100_000


class Estimator(str, enum.Enum):
    PLAIN = "plain"
    PIVOT = "pivot-reuse"
    IMPORTANCE = "importance"


class MonteCarloError(RuntimeError):
    pass


class WeightError(MonteCarloError):
    """Importance proposal has zero density where the target does not."""


class ContractError(MonteCarloError):
    """Estimator requested for a model that does not satisfy its premise."""


@dataclass(frozen=True)
class MonteCarloPlan:
    """How a Monte Carlo p-value is computed.

    ``chunk`` fixes how replicates are batched; it is part of the plan (not
    of the execution) so results never depend on ``workers``.
    """

    M: int = DEFAULT_M_CURVE
    base_seed: int = 0
    estimator: Estimator = Estimator.PLAIN
    proposal: tuple[float, ...] | None = None
    chunk: int = 16_384
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "estimator", Estimator(self.estimator))
        if self.M < 100:
            raise ValueError(f"M must be >= 100, got {self.M}")
        if self.chunk < 1 or self.workers < 1:
            raise ValueError("chunk and workers must be positive")
        if self.estimator is Estimator.IMPORTANCE and self.proposal is None:
            raise ValueError("importance sampling needs a proposal parameter")
        if self.proposal is not None:
            object.__setattr__(self, "proposal", tuple(float(x) for x in self.proposal))

    def with_proposal_at_mle(self, model: Model, data: DataSet) -> "MonteCarloPlan":
        """Same plan with the proposal set to the MLE of ``data``."""
        return _replace(self, proposal=tuple(mle(model, data).values))


def _replace(plan: MonteCarloPlan, **changes) -> MonteCarloPlan:
    fields = {
        "M": plan.M,
        "base_seed": plan.base_seed,
        "estimator": plan.estimator,
        "proposal": plan.proposal,
        "chunk": plan.chunk,
        "workers": plan.workers,
    }
    fields.update(changes)
    return MonteCarloPlan(**fields)


@dataclass(frozen=True)
class PValueEstimate:
    p_hat: float
    std_err: float
    M_used: int
    estimator: Estimator
    n_exceed: int | None = None

    @property
    def below_resolution(self) -> bool:
        """True when no replicate exceeded: report as p < 1/M."""
        return self.p_hat == 0.0

    def describe(self) -> str:
        if self.below_resolution:
            return f"p < {1.0 / self.M_used:.2g} (0 of {self.M_used})"
        return f"p = {self.p_hat:.6g} +/- {self.std_err:.2g}"


# ---- simulation ------------------------------------------------------------------


def _n_obs(model: Model, data: DataSet) -> int:
    return data.n


def simulate_suff(model: Model, theta, n_obs: int, plan: MonteCarloPlan) -> np.ndarray:
    """Sufficient statistics of M replicates simulated at ``theta``."""
    theta = np.asarray(theta, dtype=float)
    starts = list(range(0, plan.M, plan.chunk))

    def work(start):
        count = min(plan.chunk, plan.M - start)
        return model.suff(model.draw(theta, plan.base_seed, count, n_obs, start))

    return np.concatenate(_map(work, starts, plan.workers), axis=0)


def simulate_stats(model: Model, sim_theta, target, n_obs: int, plan: MonteCarloPlan) -> np.ndarray:
    """log statistics at ``target`` for M replicates simulated at ``sim_theta``."""
    sim_theta = np.asarray(sim_theta, dtype=float)
    starts = list(range(0, plan.M, plan.chunk))

    def work(start):
        count = min(plan.chunk, plan.M - start)
        s = model.suff(model.draw(sim_theta, plan.base_seed, count, n_obs, start))
        return stat_batch(model, target, s)

    return np.concatenate(_map(work, starts, plan.workers))


def _map(fn, items, workers):
    if workers == 1 or len(items) == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def observed_log_stat(model: Model, target, data: DataSet) -> float:
    """Observed statistic, computed by the same batched code as replicates."""
    model.check_data(data)
    val = float(stat_batch(model, target, model.sufficient_reduce(data)[None, :])[0])
    if math.isnan(val):
        raise MonteCarloError("statistic is not a number on the observed data")
    return val


def _estimate_from_stats(sim: np.ndarray, obs: float, estimator: Estimator) -> PValueEstimate:
    k = int(np.count_nonzero(exceeds(sim, obs)))
    m = sim.size
    p = k / m
    return PValueEstimate(p, math.sqrt(p * (1.0 - p) / m), m, estimator, k)


# ---- public estimators -----------------------------------------------------------


def mc_pvalue(model: Model, theta, data: DataSet, plan: MonteCarloPlan) -> PValueEstimate:
    """Monte Carlo p-value at a full parameter value ``theta``."""
    th = model.check_theta(theta)
    if plan.estimator is Estimator.IMPORTANCE:
        return is_pvalue(model, th, data, plan)
    obs = observed_log_stat(model, th, data)
    if plan.estimator is Estimator.PIVOT:
        ref = _pivot_reference(model, data, plan)
        sim = simulate_stats(model, ref, ref, _n_obs(model, data), plan)
    else:
        sim = simulate_stats(model, th, th, _n_obs(model, data), plan)
    return _estimate_from_stats(sim, obs, plan.estimator)


def _pivot_reference(model: Model, data: DataSet, plan: MonteCarloPlan) -> np.ndarray:
    if model.pivot is not PivotKind.FULL:
        raise ContractError(f"{model.name} is not a full pivot; use the plain estimator")
    if plan.proposal is not None:
        return model.check_theta(plan.proposal)
    return np.asarray(mle(model, data).values)


@dataclass(frozen=True)
class PValueCurve:
    """Sampled p-value function: ``grid`` rows are parameter values."""

    grid: np.ndarray
    p: np.ndarray
    std_err: np.ndarray
    method: str
    n_simulated: int = 0
    M: int | None = None
    seed: int | None = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim == 1:
            grid = grid[:, None]
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        object.__setattr__(self, "std_err", np.asarray(self.std_err, dtype=float))
        if not (len(self.grid) == len(self.p) == len(self.std_err)):
            raise ValueError("grid, p and std_err must have equal lengths")
        if np.any((self.p < 0) | (self.p > 1)):
            raise ValueError("p-values must lie in [0, 1]")
        if self.method == "exact" and np.any(self.std_err != 0):
            raise ValueError("exact curves carry zero standard errors")

    def __len__(self):
        return len(self.p)

    def argmax(self) -> np.ndarray:
        return self.grid[int(np.argmax(self.p))]


def mc_pvalue_curve(model: Model, grid, data: DataSet, plan: MonteCarloPlan) -> PValueCurve:
    """Monte Carlo p-values over a grid of full parameter values.

    Plain: common random numbers, M fresh draws per grid point.
    Pivot-reuse: M draws in total, statistics compared across the grid.
    Importance: M proposal draws in total, reweighted per grid point.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim == 1:
        grid = grid[:, None]
    if len(grid) == 0:
        raise ValueError("empty grid")
    n_obs = _n_obs(model, data)
    ps, ses = np.empty(len(grid)), np.empty(len(grid))

    if plan.estimator is Estimator.PIVOT:
        ref = _pivot_reference(model, data, plan)
        sim = np.sort(simulate_stats(model, ref, ref, n_obs, plan))
        for i, th in enumerate(grid):
            model.check_theta(th)
            est = _estimate_from_stats(sim, observed_log_stat(model, th, data), plan.estimator)
            ps[i], ses[i] = est.p_hat, est.std_err
        n_sim = plan.M
    elif plan.estimator is Estimator.IMPORTANCE:
        sampler = ImportanceSampler(model, data, plan)
        for i, th in enumerate(grid):
            est = sampler.pvalue(th)
            ps[i], ses[i] = est.p_hat, est.std_err
        n_sim = plan.M
    else:
        for i, th in enumerate(grid):
            est = mc_pvalue(model, th, data, plan)
            ps[i], ses[i] = est.p_hat, est.std_err
        n_sim = plan.M * len(grid)
    return PValueCurve(grid, ps, ses, "mc", n_sim, plan.M, plan.base_seed)


class ImportanceSampler:
    """One proposal sample reused for p-values at many parameter values."""

    def __init__(self, model: Model, data: DataSet, plan: MonteCarloPlan):
        if plan.proposal is None:
            raise ValueError("importance sampling needs a proposal parameter")
        self.model = model
        self.data = data
        self.plan = plan
        self.proposal = model.check_theta(plan.proposal)
        self.suff = simulate_suff(model, self.proposal, _n_obs(model, data), plan)
        self.log_f = model.loglik_suff(self.proposal, self.suff)

    def log_weights(self, theta) -> np.ndarray:
        th = self.model.check_theta(theta)
        if not self.model.support_covers(self.proposal, th):
            raise WeightError(
                f"proposal {tuple(self.proposal)} does not cover the support at {tuple(th)}"
            )
        log_p = self.model.loglik_suff(th, self.suff)
        bad = np.isneginf(self.log_f) & np.isfinite(log_p)
        if np.any(bad):
            raise WeightError("zero proposal density at a sampled point with positive target density")
        with np.errstate(invalid="ignore"):
            return np.where(np.isneginf(log_p), -np.inf, log_p - self.log_f)

    def pvalue(self, theta) -> PValueEstimate:
        th = self.model.check_theta(theta)
        w = np.exp(self.log_weights(th))
        obs = observed_log_stat(self.model, th, self.data)
        ind = exceeds(stat_batch(self.model, th, self.suff), obs)
        vals = np.where(ind, w, 0.0)
        m = vals.size
        p = float(np.mean(vals))
        se = float(np.std(vals) / math.sqrt(m))
        return PValueEstimate(min(max(p, 0.0), 1.0), se, m, Estimator.IMPORTANCE, int(np.count_nonzero(ind)))

    def weight_summary(self, theta) -> tuple[float, float]:
        """Mean importance weight and its standard error (mean should be ~1)."""
        w = np.exp(self.log_weights(theta))
        return float(np.mean(w)), float(np.std(w) / math.sqrt(w.size))


def is_pvalue(model: Model, theta, data: DataSet, plan: MonteCarloPlan) -> PValueEstimate:
    """Importance-sampling p-value; the proposal is ``plan.proposal``."""
    if plan.estimator is not Estimator.IMPORTANCE:
        raise ValueError("is_pvalue needs a plan with the importance estimator")
    return ImportanceSampler(model, data, plan).pvalue(theta)


# ---- nuisance parameters ---------------------------------------------------------


def marginal_mc_pvalue(model: Model, psi, data: DataSet, plan: MonteCarloPlan) -> PValueEstimate:
    """Marginal p-value for an interest value using a lambda-free profile statistic.

    Valid only when the profile statistic's distribution does not depend on
    the nuisance parameter; data are then simulated at the model's reference
    nuisance value.
    """
    if model.pivot is not PivotKind.NUISANCE_FREE:
        raise ContractError(
            f"{model.name} does not declare a nuisance-free pivot; "
            "use the sup-over-nuisance marginal p-value instead"
        )
    psi = np.atleast_1d(np.asarray(psi, dtype=float))
    if psi.size != model.interest_dim:
        raise ModelError(f"{model.name} has {model.interest_dim} interest component(s)")
    sim_theta = model.check_theta(np.concatenate([psi, model.reference_nuisance()]))
    obs = observed_log_stat(model, psi, data)
    sim = simulate_stats(model, sim_theta, psi, _n_obs(model, data), plan)
    return _estimate_from_stats(sim, obs, Estimator.PLAIN)


def mc_pvalue_at(model: Model, target, data: DataSet, plan: MonteCarloPlan, sim_theta=None) -> PValueEstimate:
    """p-value of the statistic at ``target`` (full theta or interest value)
    with data simulated at ``sim_theta`` (defaults to ``target``)."""
    target = np.atleast_1d(np.asarray(target, dtype=float))
    sim_theta = target if sim_theta is None else model.check_theta(sim_theta)
    obs = observed_log_stat(model, target, data)
    sim = simulate_stats(model, sim_theta, target, _n_obs(model, data), plan)
    return _estimate_from_stats(sim, obs, Estimator.PLAIN)
