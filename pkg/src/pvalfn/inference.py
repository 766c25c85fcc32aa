"""Tests, confidence regions and estimates derived from the p-value function.

Every task goes through one function ``target -> (p, std_err)`` built by
:func:`pvalue_function`: an exact evaluator, a Monte Carlo estimate with
common random numbers, or the Wilks chi-square approximation. Regions
invert it, composite nulls maximize it, and the point estimate maximizes
it (which for the likelihood-ratio statistic is the MLE).
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from pvalfn.mc import (
    DEFAULT_M_ENDPOINT,
    ContractError,
    Estimator,
    MonteCarloPlan,
    PValueCurve,
    marginal_mc_pvalue,
    mc_pvalue,
    mc_pvalue_at,
    mc_pvalue_curve,
)
from pvalfn.models import DataSet, Model, ModelError, ParamPoint, PivotKind
from pvalfn.numerics import (
    Bracket,
    OptimizerSettings,
    minimize_1d,
    normal_quantile,
    shrink_bracket,
)
from pvalfn.numerics.special import gamma_q
from pvalfn.statistic import mle, stat_batch

EXACT_ROOT = OptimizerSettings(max_iters=200, x_tol=1e-10, f_tol=1e-12)
MC_ROOT = OptimizerSettings(max_iters=60, x_tol=1e-5, f_tol=1e-12)
REFINE = OptimizerSettings(max_iters=60, x_tol=1e-6, f_tol=1e-12)

# A bracket that collapses onto a jump of at least this size marks a
# discontinuity of the p-value function (uniform support edge, binomial
# stair steps), where the endpoint is attained. Monte Carlo steps are 1/M.
JUMP = 0.005

DISCRETE_SCAN_POINTS = 2001


class Method(str, enum.Enum):
    EXACT = "exact"
    MC = "mc"
    WILKS = "wilks"
    AUTO = "auto"


class InferenceError(RuntimeError):
    pass


class DegenerateDataError(InferenceError):
    """The data leave the statistic undefined (e.g. zero variance)."""


PFunc = Callable[[np.ndarray], tuple[float, float]]


# ---- parameter regions -------------------------------------------------------


@dataclass(frozen=True)
class ParamRegion:
    """A box ``lo <= x <= hi`` (bounds may be infinite) or a finite point set."""

    lo: tuple[float, ...] = ()
    hi: tuple[float, ...] = ()
    points: tuple[tuple[float, ...], ...] = ()

    def __post_init__(self):
        if self.points:
            dims = {len(p) for p in self.points}
            if len(dims) != 1:
                raise ValueError("grid points must share one dimension")
        else:
            if len(self.lo) != len(self.hi) or not self.lo:
                raise ValueError("empty region")
            if any(a > b for a, b in zip(self.lo, self.hi)):
                raise ValueError("empty region: lo > hi")

    @classmethod
    def point(cls, values: Sequence[float]) -> "ParamRegion":
        vals = tuple(float(v) for v in np.atleast_1d(values))
        return cls(vals, vals)

    @classmethod
    def box(cls, lo: Sequence[float], hi: Sequence[float]) -> "ParamRegion":
        return cls(tuple(float(v) for v in lo), tuple(float(v) for v in hi))

    @classmethod
    def grid(cls, points) -> "ParamRegion":
        pts = tuple(tuple(float(v) for v in np.atleast_1d(p)) for p in points)
        if not pts:
            raise ValueError("empty region")
        return cls(points=pts)

    @property
    def dim(self) -> int:
        return len(self.points[0]) if self.points else len(self.lo)

    @property
    def is_point(self) -> bool:
        return (not self.points and self.lo == self.hi) or len(self.points) == 1

    def contains(self, x) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.points:
            return any(np.array_equal(x, p) for p in self.points)
        return bool(np.all(x >= self.lo) and np.all(x <= self.hi))

    def describe(self) -> str:
        if self.points:
            return f"{len(self.points)} grid point(s)"
        parts = [f"[{a:g}, {b:g}]" if a != b else f"{a:g}" for a, b in zip(self.lo, self.hi)]
        return " x ".join(parts)


# ---- results -----------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False
    lo_se: float = 0.0
    hi_se: float = 0.0

    def contains(self, x: float) -> bool:
        left = x > self.lo or (self.lo_closed and x == self.lo)
        right = x < self.hi or (self.hi_closed and x == self.hi)
        return left and right

    def format(self, digits: int = 4) -> str:
        lb = "[" if self.lo_closed else "("
        rb = "]" if self.hi_closed else ")"
        return f"{lb}{_fmt(self.lo, digits)}, {_fmt(self.hi, digits)}{rb}"


def _fmt(x: float, digits: int) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{digits}g}"


@dataclass(frozen=True)
class ConfidenceRegion:
    """{theta : p(theta) > alpha} for a scalar parameter, as disjoint segments."""

    level: float
    segments: tuple[Segment, ...]
    method: str
    center: float = math.nan

    def __post_init__(self):
        segs = self.segments
        for a, b in zip(segs, segs[1:]):
            if not a.hi <= b.lo:
                raise ValueError("segments must be ordered and disjoint")

    @property
    def alpha(self) -> float:
        return 1.0 - self.level

    @property
    def lo(self) -> float:
        return self.segments[0].lo

    @property
    def hi(self) -> float:
        return self.segments[-1].hi

    def contains(self, x: float) -> bool:
        return any(s.contains(x) for s in self.segments)

    @property
    def unbounded(self) -> tuple[bool, bool]:
        return math.isinf(self.lo), math.isinf(self.hi)

    def format(self, digits: int = 4) -> str:
        return " U ".join(s.format(digits) for s in self.segments)


@dataclass(frozen=True)
class TestResult:
    null: ParamRegion
    p_value: float
    std_err: float
    alpha: float
    reject: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "reject", self.p_value <= self.alpha)


# ---- p-value dispatch --------------------------------------------------------


def resolve_method(model: Model, method) -> Method:
    method = Method(method)
    if method is Method.AUTO:
        full = model.interest_dim == model.param_dim
        return Method.EXACT if full and model.has_analytic_pvalue else Method.MC
    return method


def wilks_pvalue(model: Model, target, data: DataSet) -> float:
    """Large-sample approximation 1 - G_k(2 log T), k = dim(target).

    For a scalar target this is 1 - G(2 log T) with G the ChiSq(1) CDF. The
    statistic is the full likelihood ratio for a full parameter and the profile
    ratio for an interest value.
    """
    target = np.atleast_1d(np.asarray(target, dtype=float))
    if target.size == model.param_dim:
        model.check_theta(target)
    log_t = float(stat_batch(model, target, model.sufficient_reduce(data)[None, :])[0])
    if not math.isfinite(log_t):
        return 0.0
    return gamma_q(0.5 * target.size, log_t)  # P(ChiSq_k > 2 log T)


def pvalue(model: Model, theta, data: DataSet, method="auto", plan: MonteCarloPlan | None = None) -> tuple[float, float]:
    """p-value at a full parameter value, with its Monte Carlo standard error."""
    method = resolve_method(model, method)
    th = model.check_theta(theta)
    if method is Method.EXACT:
        if not model.has_analytic_pvalue:
            raise InferenceError(f"no exact p-value for {model.name}; use mc or wilks")
        return model.analytic_pvalue(th, data), 0.0
    if method is Method.WILKS:
        return wilks_pvalue(model, th, data), 0.0
    if plan is None:
        raise InferenceError("the mc method needs a MonteCarloPlan")
    est = mc_pvalue(model, th, data, plan)
    return est.p_hat, est.std_err


def pvalue_function(
    model: Model,
    data: DataSet,
    method="auto",
    plan: MonteCarloPlan | None = None,
    nuisance_box: "ParamRegion | None" = None,
) -> PFunc:
    """Map from interest value to (p, std_err).

    For models without nuisance parameters the interest value is the full
    parameter. Otherwise the marginal p-value is used: the lambda-free pivot
    path when the model has one, or the sup over ``nuisance_box``.
    """
    method = resolve_method(model, method)
    model.check_data(data)
    if model.interest_dim == model.param_dim:
        return lambda t: pvalue(model, t, data, method, plan)
    if method is Method.EXACT:
        raise InferenceError(f"no exact marginal p-value for {model.name}")
    if method is Method.WILKS:
        return lambda t: (wilks_pvalue(model, t, data), 0.0)
    if plan is None:
        raise InferenceError("the mc method needs a MonteCarloPlan")
    if model.pivot is PivotKind.NUISANCE_FREE and nuisance_box is None:

        def pivot_path(t):
            est = marginal_mc_pvalue(model, t, data, plan)
            return est.p_hat, est.std_err

        return pivot_path
    if nuisance_box is None:
        raise InferenceError(f"{model.name} needs a nuisance search box for the sup path")
    return lambda t: marginal_pvalue_sup(model, t, data, method, plan, nuisance_box)


# ---- composite nulls ---------------------------------------------------------


def _finite_range(f: PFunc, model: Model, center: np.ndarray, dim: int, lo: float, hi: float) -> tuple[float, float]:
    """Replace infinite box sides by points where p has become negligible."""
    dom = model.bounds[dim]
    c = float(center[dim])

    def along(x):
        pt = center.copy()
        pt[dim] = x
        return f(pt)[0]

    out = []
    for side, bound in ((-1, lo), (1, hi)):
        if math.isfinite(bound):
            out.append(bound)
            continue
        limit = dom.lo if side < 0 else dom.hi
        x, _ = _expand(along, c, side, limit, 1e-12, _initial_step(c))
        out.append(x)
    return out[0], out[1]


def composite_pvalue(
    model: Model,
    region: ParamRegion,
    data: DataSet,
    method="auto",
    plan: MonteCarloPlan | None = None,
    grid_points: int = 101,
    pfunc: PFunc | None = None,
) -> tuple[float, float]:
    """sup of the p-value over a null region (grid scan + 1-d polish).

    ``region`` lives in the interest space (the full parameter when the model
    has no nuisance part). The returned value dominates every grid value.
    """
    f = pfunc or pvalue_function(model, data, method, plan)
    if region.points:
        vals = [f(np.asarray(p)) for p in region.points]
        i = int(np.argmax([v[0] for v in vals]))
        return vals[i]

    k = region.dim
    center = _interest_center(model, data)
    if center.size != k:
        raise ValueError(f"null region has dimension {k}, interest dimension is {center.size}")
    lo = np.array(region.lo)
    hi = np.array(region.hi)
    # the p-value is usually largest at the point of the box nearest the MLE
    proj = np.clip(center, lo, hi)
    for j in range(k):
        if not model.bounds[j].contains(float(proj[j])):
            proj[j] = _nudge_inside(model, j, float(proj[j]))
    ranges = []
    for j in range(k):
        a, b = lo[j], hi[j]
        if not (math.isfinite(a) and math.isfinite(b)):
            fa, fb = _finite_range(f, model, proj.copy(), j, a, b)
            a, b = max(a, fa), min(b, fb)
            if a > b:
                a = b = proj[j]
        ranges.append((a, b))

    per_dim = grid_points if k == 1 else max(3, int(round(grid_points ** (1.0 / k))))
    axes = [_interior_linspace(model, j, a, b, per_dim) for j, (a, b) in enumerate(ranges)]
    best_pt, best = proj, f(proj)
    for pt in itertools.product(*axes):
        pt = np.array(pt)
        val = f(pt)
        if val[0] > best[0]:
            best_pt, best = pt, val
    if best[0] >= 1.0:
        return best

    # coordinate-wise polish around the best grid point
    for j, (a, b) in enumerate(ranges):
        if a == b:
            continue
        step = (b - a) / max(per_dim - 1, 1)
        left, right = max(a, best_pt[j] - step), min(b, best_pt[j] + step)
        if not left < right:
            continue

        def neg(x, j=j):
            pt = best_pt.copy()
            pt[j] = x
            return -f(pt)[0]

        x, _ = minimize_1d(neg, left, right, REFINE)
        cand = best_pt.copy()
        cand[j] = x
        if model.bounds[j].contains(x):
            val = f(cand)
            if val[0] > best[0]:
                best_pt, best = cand, val
    return best


def _interior_linspace(model: Model, j: int, a: float, b: float, n: int) -> np.ndarray:
    if a == b:
        return np.array([a])
    xs = np.linspace(a, b, n)
    dom = model.bounds[j]
    return np.array([x if dom.contains(x) else _nudge_inside(model, j, x) for x in xs])


def _nudge_inside(model: Model, j: int, x: float) -> float:
    dom = model.bounds[j]
    eps = 1e-9 * max(1.0, abs(x))
    if x <= dom.lo:
        return dom.lo + eps
    if x >= dom.hi:
        return dom.hi - eps
    return x


def marginal_pvalue_sup(
    model: Model,
    psi,
    data: DataSet,
    method="mc",
    plan: MonteCarloPlan | None = None,
    nuisance_box: ParamRegion | None = None,
    grid_points: int | None = None,
) -> tuple[float, float]:
    """sup over the nuisance box of P_(psi, lambda){T_psi(Y) >= T_psi(y)}.

    T_psi is the profile statistic. For lambda-free pivots the sup is flat, so
    this agrees with :func:`pvalfn.mc.marginal_mc_pvalue` up to Monte Carlo
    error.
    """
    psi = np.atleast_1d(np.asarray(psi, dtype=float))
    method = resolve_method(model, method)
    if model.interest_dim == model.param_dim:
        return pvalue(model, psi, data, method, plan)
    if nuisance_box is None:
        raise ValueError("a nuisance search box is required")
    q = model.param_dim - model.interest_dim
    if nuisance_box.dim != q:
        raise ValueError(f"nuisance box must have dimension {q}")
    if method is Method.WILKS:
        return wilks_pvalue(model, psi, data), 0.0
    if method is Method.EXACT:
        raise InferenceError(f"no exact p-value for {model.name}")
    if plan is None:
        raise InferenceError("the mc method needs a MonteCarloPlan")

    def joint(lam):
        th = np.concatenate([psi, np.atleast_1d(lam)])
        est = mc_pvalue_at(model, psi, data, plan, sim_theta=th)
        return est.p_hat, est.std_err

    if nuisance_box.points:
        vals = [joint(np.asarray(p)) for p in nuisance_box.points]
        return vals[int(np.argmax([v[0] for v in vals]))]

    if grid_points is None:
        grid_points = 101 if q == 1 else 7**q
    per_dim = grid_points if q == 1 else max(3, int(round(grid_points ** (1.0 / q))))
    k = model.interest_dim
    axes = [
        _interior_linspace(model, k + j, a, b, per_dim)
        for j, (a, b) in enumerate(zip(nuisance_box.lo, nuisance_box.hi))
    ]
    best_pt, best = None, (-1.0, 0.0)
    for pt in itertools.product(*axes):
        pt = np.array(pt)
        val = joint(pt)
        if val[0] > best[0]:
            best_pt, best = pt, val
    for j, (a, b) in enumerate(zip(nuisance_box.lo, nuisance_box.hi)):
        if a == b:
            continue
        step = (b - a) / max(per_dim - 1, 1)
        left, right = max(a, best_pt[j] - step), min(b, best_pt[j] + step)

        def neg(x, j=j):
            pt = best_pt.copy()
            pt[j] = x
            return -joint(pt)[0]

        x, _ = minimize_1d(neg, left, right, REFINE)
        cand = best_pt.copy()
        cand[j] = x
        if model.bounds[k + j].contains(x):
            val = joint(cand)
            if val[0] > best[0]:
                best_pt, best = cand, val
    return best


def test(
    model: Model,
    null: ParamRegion,
    data: DataSet,
    alpha: float = 0.05,
    method="auto",
    plan: MonteCarloPlan | None = None,
    nuisance_box: ParamRegion | None = None,
) -> TestResult:
    """Reject H0: theta in ``null`` iff its p-value is <= alpha."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    f = pvalue_function(model, data, method, plan, nuisance_box)
    if null.is_point:
        pt = np.asarray(null.points[0] if null.points else null.lo)
        p, se = f(pt)
    else:
        p, se = composite_pvalue(model, null, data, method, plan, pfunc=f)
    return TestResult(null, p, se, alpha)


# ---- point estimate ----------------------------------------------------------


def max_pvalue_estimate(model: Model, data: DataSet) -> ParamPoint:
    """Maximizer of the p-value function.

    With the likelihood-ratio statistic T >= 1 with equality only at the
    MLE, so the p-value function is maximized there.
    """
    return mle(model, data)


def _interest_center(model: Model, data: DataSet) -> np.ndarray:
    try:
        est = np.asarray(mle(model, data).values)
    except ModelError as exc:
        raise DegenerateDataError(str(exc)) from exc
    if not np.all(np.isfinite(est)):
        raise DegenerateDataError("maximum likelihood estimate is not finite")
    if not model.discrete and not model.in_domain(est):
        # e.g. an all-zero exponential sample: the statistic is undefined
        raise DegenerateDataError(f"maximum likelihood estimate {tuple(est)} lies outside the parameter space")
    return est[: model.interest_dim].copy()


# ---- confidence regions ------------------------------------------------------


def _initial_step(c: float) -> float:
    return 0.1 * (abs(c) + 1.0)


def _expand(g: Callable[[float], float], center: float, side: int, limit: float, alpha: float, step: float):
    """Walk outward from ``center`` doubling the step until g(x) <= alpha.

    Returns (x, inside) where x is the first point with g <= alpha, or the
    domain limit (and inside=True) if none was found before the limit.
    """
    inside = center
    x = center + side * step
    for _ in range(200):
        if (side < 0 and x <= limit) or (side > 0 and x >= limit):
            if math.isinf(limit):
                return limit, True
            x = limit
            return x, True
        if g(x) <= alpha:
            return x, False
        inside = x
        step *= 2.0
        x = center + side * step
    return x, True


def confidence_region(
    model: Model,
    data: DataSet,
    alpha: float = 0.05,
    method="auto",
    plan: MonteCarloPlan | None = None,
    search: tuple[float, float] | None = None,
    nuisance_box: ParamRegion | None = None,
    settings: OptimizerSettings | None = None,
) -> ConfidenceRegion:
    """{theta: p(theta) > alpha} for a scalar (interest) parameter.

    Continuous curves: bracket outward from the maximum-p point (doubling
    steps, starting from ``search`` guesses when given) and solve p = alpha
    with the bracketing root finder. Discrete models: scan a fine grid and
    refine every crossing, so stair-step curves keep all their segments.
    A side that reaches the domain edge without crossing is left open-ended
    (or closed at an included edge such as psi = 0).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if model.interest_dim != 1:
        raise InferenceError("confidence intervals need a scalar interest parameter")
    method = resolve_method(model, method)
    f = pvalue_function(model, data, method, plan, nuisance_box)
    if settings is None:
        settings = MC_ROOT if method is Method.MC else EXACT_ROOT
    center = float(_interest_center(model, data)[0])
    dom = model.bounds[0]
    if not dom.contains(center):
        center = _nudge_inside(model, 0, center)

    cache: dict[float, tuple[float, float]] = {}

    def pf(x: float) -> tuple[float, float]:
        if x not in cache:
            cache[x] = f(np.array([x]))
        return cache[x]

    def g(x: float) -> float:
        return pf(x)[0]

    if model.discrete:
        segs = _scan_region(model, g, alpha, settings)
        return ConfidenceRegion(1.0 - alpha, tuple(segs), method.value, center)

    ends = []
    for side in (-1, 1):
        limit = dom.lo if side < 0 else dom.hi
        step = _initial_step(center)
        if search is not None:
            guess = search[0] if side < 0 else search[1]
            if side * (guess - center) > 0:
                step = abs(guess - center)
        ends.append(_one_side(model, g, pf, center, side, limit, alpha, step, settings, method))
    (lo, lo_closed, lo_se), (hi, hi_closed, hi_se) = ends
    seg = Segment(lo, hi, lo_closed, hi_closed, lo_se, hi_se)
    return ConfidenceRegion(1.0 - alpha, (seg,), method.value, center)


def _one_side(model, g, pf, center, side, limit, alpha, step, settings, method):
    dom = model.bounds[0]
    if g(center) <= alpha:
        # the curve never exceeds alpha at its peak: degenerate, empty side
        return center, False, 0.0
    # shrink a too-large first step back toward the center
    x = center + side * step
    if side * (x - limit) >= 0:
        x = limit if math.isfinite(limit) else x
    inside = center
    if math.isfinite(x) and (dom.contains(x) or x == limit):
        xe = x if dom.contains(x) else _nudge_inside(model, 0, x)
        if g(xe) <= alpha:
            for _ in range(60):
                mid = center + 0.5 * (xe - center)
                if abs(mid - center) <= settings.xtol_at(center):
                    break
                if g(mid) > alpha:
                    inside = mid
                    break
                xe = mid
            outside = xe
        else:
            inside = xe
            outside, hit_limit = _expand(g, center, side, limit, alpha, abs(xe - center) * 2.0)
            if hit_limit:
                return _edge(model, g, side, limit, alpha)
    else:
        outside, hit_limit = _expand(g, center, side, limit, alpha, step)
        if hit_limit:
            return _edge(model, g, side, limit, alpha)
    if not dom.contains(outside):
        outside = _nudge_inside(model, 0, outside)
        if g(outside) > alpha:
            return _edge(model, g, side, limit, alpha)

    def h(x):
        return g(x) - alpha

    a, b = (outside, inside) if side < 0 else (inside, outside)
    bracket = Bracket(a, b, h(a), h(b))
    final, root = shrink_bracket(h, bracket, settings)
    x_in, x_out = (final.hi, final.lo) if side < 0 else (final.lo, final.hi)
    jump = g(x_in) - g(x_out)
    if jump > JUMP:
        # discontinuity: the boundary value belongs to the region
        endpoint, closed = x_in, True
    else:
        endpoint, closed = root, False
    se = _endpoint_se(pf, endpoint, center, method) if method is Method.MC else 0.0
    return endpoint, closed, se


def _edge(model, g, side, limit, alpha):
    dom = model.bounds[0]
    if math.isinf(limit):
        return limit, False, 0.0
    closed = (dom.lo_closed if side < 0 else dom.hi_closed) and g(limit) > alpha
    return limit, closed, 0.0


def _endpoint_se(pf, x: float, center: float, method: Method) -> float:
    """Monte Carlo error of an endpoint: std_err / |p'| via central differences."""
    h = max(0.02 * abs(x - center), 1e-6)
    p_lo, p_hi = pf(x - h)[0], pf(x + h)[0]
    slope = (p_hi - p_lo) / (2.0 * h)
    se = pf(x)[1]
    if slope == 0.0:
        return math.inf
    return abs(se / slope)


def _scan_region(model: Model, g, alpha: float, settings: OptimizerSettings) -> list[Segment]:
    dom = model.bounds[0]
    lo = dom.lo if math.isfinite(dom.lo) else None
    hi = dom.hi if math.isfinite(dom.hi) else None
    if lo is None or hi is None:
        raise InferenceError("grid scan needs a bounded parameter domain")
    xs = np.linspace(lo, hi, DISCRETE_SCAN_POINTS)
    xs = np.array([x if dom.contains(x) else _nudge_inside(model, 0, x) for x in xs])
    inside = np.array([g(x) > alpha for x in xs])
    segs = []
    i = 0
    n = len(xs)
    while i < n:
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and inside[j + 1]:
            j += 1
        if i == 0:
            left, lc = (dom.lo, dom.lo_closed and g(dom.lo) > alpha) if dom.lo_closed else (dom.lo, False)
        else:
            left, lc = _refine_crossing(g, xs[i - 1], xs[i], alpha, settings)
        if j == n - 1:
            right, rc = (dom.hi, dom.hi_closed and g(dom.hi) > alpha) if dom.hi_closed else (dom.hi, False)
        else:
            right, rc = _refine_crossing(g, xs[j + 1], xs[j], alpha, settings)
        segs.append(Segment(left, right, lc, rc))
        i = j + 1
    return segs


def _refine_crossing(g, x_out: float, x_in: float, alpha: float, settings: OptimizerSettings):
    def h(x):
        return g(x) - alpha

    a, b = sorted((x_out, x_in))
    final, root = shrink_bracket(h, Bracket(a, b, h(a), h(b)), settings)
    xi, xo = (final.hi, final.lo) if x_in > x_out else (final.lo, final.hi)
    if g(xi) - g(xo) > JUMP:
        return xi, True
    return root, False


def marginal_confidence_region(
    model: Model,
    data: DataSet,
    alpha: float = 0.05,
    method="mc",
    plan: MonteCarloPlan | None = None,
    nuisance_box: ParamRegion | None = None,
    search: tuple[float, float] | None = None,
) -> ConfidenceRegion:
    """Confidence interval for the interest parameter from the marginal p-value."""
    if model.interest_dim == model.param_dim:
        raise InferenceError(f"{model.name} has no nuisance parameter")
    return confidence_region(model, data, alpha, method, plan, search, nuisance_box)


# ---- curves ------------------------------------------------------------------


def pvalue_curve(
    model: Model,
    data: DataSet,
    grid,
    method="auto",
    plan: MonteCarloPlan | None = None,
) -> PValueCurve:
    """p-value function sampled on ``grid`` (rows are interest values)."""
    method = resolve_method(model, method)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim == 1:
        grid = grid[:, None]
    if method is Method.MC and model.interest_dim == model.param_dim:
        if plan is None:
            raise InferenceError("the mc method needs a MonteCarloPlan")
        return mc_pvalue_curve(model, grid, data, plan)
    f = pvalue_function(model, data, method, plan)
    vals = np.array([f(row) for row in grid])
    n_sim = plan.M * len(grid) if method is Method.MC and plan is not None else 0
    return PValueCurve(
        grid,
        vals[:, 0],
        vals[:, 1],
        method.value,
        n_sim,
        plan.M if method is Method.MC and plan else None,
        plan.base_seed if method is Method.MC and plan else None,
    )


def auto_grid(model: Model, data: DataSet, count: int = 201, method="auto", plan=None) -> np.ndarray:
    """Grid spanning the max-p point out to where p drops below 0.001.

    Monte Carlo curves use the (cheap) Wilks approximation to choose the
    span, widened by 25%.
    """
    method = resolve_method(model, method)
    center = _interest_center(model, data)
    if model.interest_dim == 1:
        span_method = Method.WILKS if method is Method.MC else method
        reg = confidence_region(model, data, 0.001, span_method, plan)
        lo, hi = reg.lo, reg.hi
        dom = model.bounds[0]
        width = hi - lo if math.isfinite(hi - lo) else 10.0 * (abs(center[0]) + 1.0)
        if span_method is not method:
            lo, hi = lo - 0.125 * width, hi + 0.125 * width
        lo = max(lo if math.isfinite(lo) else center[0] - width, dom.lo)
        hi = min(hi if math.isfinite(hi) else center[0] + width, dom.hi)
        # show a little of the zero region next to a support edge (uniform)
        if lo == center[0]:
            lo = max(center[0] - 0.1 * width, dom.lo)
        xs = np.linspace(lo, hi, count)
        return np.array([x if dom.contains(x) else _nudge_inside(model, 0, x) for x in xs])
    # several interest components: per-axis spans from the MLE, padded
    axes = []
    per = max(3, int(round(count ** (1.0 / model.interest_dim))))
    f = pvalue_function(model, data, Method.WILKS if method is Method.MC else method, plan)
    for j in range(model.interest_dim):
        dom = model.bounds[j]
        c = float(center[j])

        def along(x, j=j):
            pt = center.copy()
            pt[j] = x
            return f(pt)[0]

        lo, _ = _expand(along, c, -1, dom.lo, 0.001, _initial_step(c))
        hi, _ = _expand(along, c, 1, dom.hi, 0.001, _initial_step(c))
        lo = lo if math.isfinite(lo) else c - 10.0 * (abs(c) + 1.0)
        hi = hi if math.isfinite(hi) else c + 10.0 * (abs(c) + 1.0)
        w = hi - lo
        lo, hi = max(lo - w, dom.lo), min(hi + w, dom.hi)
        xs = np.linspace(lo, hi, per)
        axes.append([x if dom.contains(x) else _nudge_inside(model, j, x) for x in xs])
    return np.array(list(itertools.product(*axes)))


# ---- classical comparison intervals ------------------------------------------


def comparison_intervals(model: Model, data: DataSet, alpha: float = 0.05) -> dict[str, tuple[float, float]]:
    """Textbook intervals for side-by-side reporting.

    binomial: Wald; bivariate normal: Fisher z; normal: z-interval.
    """
    z = normal_quantile(1.0 - alpha / 2.0)
    if model.name == "binomial":
        n = model.n_trials
        th = float(data.obs[0, 0]) / n
        half = z * math.sqrt(th * (1.0 - th) / n)
        return {"wald": (th - half, th + half)}
    if model.name == "bivariate-normal-corr":
        r = float(mle(model, data).values[0])
        zr = math.atanh(r)
        half = z / math.sqrt(data.n - 3)
        return {"fisher-z": (math.tanh(zr - half), math.tanh(zr + half))}
    if model.name == "normal-known-var":
        ybar = float(data.obs[:, 0].mean())
        half = z * model.sigma / math.sqrt(data.n)
        return {"z": (ybar - half, ybar + half)}
    raise InferenceError(f"no comparison interval for {model.name}")


__all__ = [
    "ConfidenceRegion",
    "ContractError",
    "DEFAULT_M_ENDPOINT",
    "DegenerateDataError",
    "Estimator",
    "InferenceError",
    "Method",
    "ParamRegion",
    "Segment",
    "TestResult",
    "auto_grid",
    "comparison_intervals",
    "composite_pvalue",
    "confidence_region",
    "marginal_confidence_region",
    "marginal_pvalue_sup",
    "max_pvalue_estimate",
    "pvalue",
    "pvalue_curve",
    "pvalue_function",
    "resolve_method",
    "test",
    "wilks_pvalue",
]
