"""Model abstraction shared by every built-in sampling model.

A model works on two levels. The scalar level (``log_likelihood``,
``sample``) is what users see. The batched level works on arrays of
replicates reduced to sufficient statistics: ``suff`` maps an array of raw
datasets ``(M, n, d)`` to ``(M, k)``, and ``loglik_suff`` evaluates the
log-likelihood *up to a parameter-free additive constant* on those rows.
Likelihood ratios, importance weights and profile statistics only ever need
differences of log-likelihoods, so the constant never matters.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class ModelError(ValueError):
    """Bad model name, missing constants, or parameters outside the domain."""


class PivotKind(enum.Enum):
    FULL = "full-pivot"
    NUISANCE_FREE = "nuisance-free-pivot"
    NONE = "none"


@dataclass(frozen=True)
class Interval:
    """Domain of one parameter component."""

    lo: float = -math.inf
    hi: float = math.inf
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, x: float) -> bool:
        if x < self.lo or x > self.hi or math.isnan(x):
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True


@dataclass(frozen=True)
class ParamPoint:
    values: tuple[float, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) != len(self.labels):
            raise ModelError("values and labels differ in length")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype or float)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.labels, self.values))


@dataclass(frozen=True, eq=False)
class DataSet:
    """Observed data: ``obs`` is ``(n, d)``; ``meta`` holds known constants."""

    obs: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        obs = np.asarray(self.obs, dtype=float)
        if obs.ndim == 1:
            obs = obs[:, None]
        if obs.ndim != 2 or obs.shape[0] < 1:
            raise ModelError(f"observations must be a nonempty (n, d) array, got {obs.shape}")
        object.__setattr__(self, "obs", obs)
        for key, val in self.meta.items():
            if isinstance(val, (list, tuple, np.ndarray)) and len(val) != obs.shape[0]:
                raise ModelError(f"metadata '{key}' has length {len(val)}, expected {obs.shape[0]}")

    @property
    def n(self) -> int:
        return self.obs.shape[0]

    def __eq__(self, other):
        return (
            isinstance(other, DataSet)
            and self.obs.shape == other.obs.shape
            and bool(np.array_equal(self.obs, other.obs))
        )

    def __hash__(self):
        return hash(self.obs.tobytes())


class Model:
    """Base class for parametric sampling models.

    Subclasses set the class attributes and implement ``draw``, ``suff``,
    ``loglik_suff``, ``log_likelihood`` and ``moment_start``; the optional
    shortcuts (``mle_suff``, ``profile_nuisance_suff``, ``analytic_pvalue``)
    are advertised through the ``has_*`` properties.
    """

    name: str = "abstract"
    labels: tuple[str, ...] = ()
    interest_dim: int = 0
    pivot: PivotKind = PivotKind.NONE
    discrete: bool = False
    obs_dim: int = 1
    bounds: tuple[Interval, ...] = ()

    @property
    def param_dim(self) -> int:
        return len(self.labels)

    @property
    def interest_labels(self) -> tuple[str, ...]:
        return self.labels[: self.interest_dim]

    # ---- parameter handling -------------------------------------------------

    def point(self, values) -> ParamPoint:
        vals = tuple(float(v) for v in np.atleast_1d(np.asarray(values, dtype=float)))
        if len(vals) != self.param_dim:
            raise ModelError(
                f"{self.name} has {self.param_dim} parameters, got {len(vals)}"
            )
        return ParamPoint(vals, self.labels)

    def check_theta(self, theta) -> np.ndarray:
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        if th.shape != (self.param_dim,):
            raise ModelError(
                f"{self.name} expects a parameter of dimension {self.param_dim}, got {th.shape}"
            )
        for x, dom, lab in zip(th, self.bounds, self.labels):
            if not dom.contains(float(x)):
                raise ModelError(f"{lab}={x} is outside the domain of {self.name}")
        return th

    def in_domain(self, theta) -> bool:
        try:
            self.check_theta(theta)
        except ModelError:
            return False
        return True

    def to_unconstrained(self, theta: np.ndarray) -> np.ndarray:
        return np.asarray(theta, dtype=float)

    def from_unconstrained(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(v, dtype=float)

    def default_n_obs(self) -> int | None:
        return None

    # ---- data ---------------------------------------------------------------

    def check_data(self, data: DataSet) -> None:
        if data.obs.shape[1] != self.obs_dim:
            raise ModelError(
                f"{self.name} expects {self.obs_dim} column(s), got {data.obs.shape[1]}"
            )

    def sample(self, theta, seed: int, n_replicates: int, n_obs: int | None = None) -> list[DataSet]:
        """Draw ``n_replicates`` datasets; replicate ``m`` depends only on (seed, m)."""
        th = self.check_theta(theta)
        n_obs = self._resolve_n(n_obs)
        arr = self.draw(th, seed, n_replicates, n_obs)
        return [self._wrap(a) for a in arr]

    def _resolve_n(self, n_obs):
        if n_obs is None:
            n_obs = self.default_n_obs()
        if n_obs is None or n_obs < 1:
            raise ModelError(f"{self.name} needs a positive sample size")
        return int(n_obs)

    def _wrap(self, arr: np.ndarray) -> DataSet:
        return DataSet(arr)

    def sufficient_reduce(self, data: DataSet) -> np.ndarray:
        self.check_data(data)
        return self.suff(data.obs[None, :, :])[0]

    # ---- hooks for subclasses -----------------------------------------------

    def draw(self, theta: np.ndarray, seed: int, count: int, n_obs: int, start: int = 0) -> np.ndarray:
        raise NotImplementedError

    def suff(self, obs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def loglik_suff(self, theta: np.ndarray, s: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log_likelihood(self, theta, data: DataSet) -> float:
        raise NotImplementedError

    def moment_start(self, data: DataSet) -> np.ndarray:
        raise NotImplementedError

    def mle_suff(self, s: np.ndarray) -> np.ndarray:
        """Row-wise maximum likelihood estimates, shape ``(M, param_dim)``."""
        raise NotImplementedError

    def profile_nuisance_suff(self, psi: np.ndarray, s: np.ndarray) -> np.ndarray:
        """Row-wise maximizing nuisance value at fixed interest value ``psi``."""
        raise NotImplementedError

    def closed_form_mle(self, data: DataSet) -> np.ndarray:
        return self.mle_suff(self.sufficient_reduce(data)[None, :])[0]

    def analytic_pvalue(self, theta, data: DataSet) -> float:
        raise NotImplementedError(f"{self.name} has no analytic p-value")

    def reference_nuisance(self) -> np.ndarray:
        raise NotImplementedError(f"{self.name} declares no reference nuisance value")

    def support_covers(self, theta_proposal: np.ndarray, theta_target: np.ndarray) -> bool:
        """Whether the proposal's support contains the target's support."""
        return True

    @property
    def has_closed_form_mle(self) -> bool:
        return type(self).mle_suff is not Model.mle_suff and self.mle_is_closed_form

    mle_is_closed_form: bool = True

    @property
    def has_analytic_pvalue(self) -> bool:
        return type(self).analytic_pvalue is not Model.analytic_pvalue

    @property
    def has_profile_nuisance(self) -> bool:
        return type(self).profile_nuisance_suff is not Model.profile_nuisance_suff

    def __repr__(self):
        return f"<Model {self.name}>"


def as_batch(theta: np.ndarray) -> tuple[np.ndarray, ...]:
    """Split a parameter array (``(p,)`` or ``(M, p)``) into its components."""
    th = np.asarray(theta, dtype=float)
    return tuple(th[..., i] for i in range(th.shape[-1]))
