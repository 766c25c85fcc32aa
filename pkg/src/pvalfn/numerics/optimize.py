"""Derivative-free minimization in one and several dimensions."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from pvalfn.numerics.roots import DEFAULT_SETTINGS, OptimizerSettings
from pvalfn.numerics.special import DomainError

_GOLD = 0.5 * (3.0 - math.sqrt(5.0))  # 0.381966...

# Nelder-Mead coefficients: reflection, expansion, contraction, shrink.
NM_REFLECT = 1.0
NM_EXPAND = 2.0
NM_CONTRACT = 0.5
NM_SHRINK = 0.5

ND_SETTINGS = OptimizerSettings(max_iters=5000, x_tol=1e-9, f_tol=1e-12)


def minimize_1d(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    settings: OptimizerSettings = DEFAULT_SETTINGS,
) -> tuple[float, float]:
    """Brent's golden-section/parabolic search on ``[lo, hi]``.

    The endpoints are evaluated as well, and the best point seen is returned,
    so boundary minima are found exactly.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    best_x, best_f = lo, f(lo)
    f_hi = f(hi)
    if f_hi < best_f:
        best_x, best_f = hi, f_hi

    a, b = lo, hi
    x = w = v = a + _GOLD * (b - a)
    fx = fw = fv = f(x)
    d = e = 0.0
    for _ in range(settings.max_iters):
        m = 0.5 * (a + b)
        tol1 = settings.xtol_at(x) / 3.0
        tol2 = 2.0 * tol1
        if abs(x - m) <= tol2 - 0.5 * (b - a):
            break
        use_golden = True
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0:
                p = -p
            q = abs(q)
            e_prev = e
            e = d
            if abs(p) < abs(0.5 * q * e_prev) and q * (a - x) < p < q * (b - x):
                d = p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if m >= x else -tol1
                use_golden = False
        if use_golden:
            e = (a - x) if x >= m else (b - x)
            d = _GOLD * e
        u = x + d if abs(d) >= tol1 else x + (tol1 if d > 0 else -tol1)
        fu = f(u)
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, fv = w, fw
            w, fw = x, fx
            x, fx = u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv = w, fw
                w, fw = u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    if fx < best_f:
        best_x, best_f = x, fx
    return float(best_x), float(best_f)


def minimize_1d_batch(
    f: Callable[[np.ndarray], np.ndarray],
    lo: np.ndarray,
    hi: np.ndarray,
    n_iter: int = 60,
) -> tuple[np.ndarray, np.ndarray]:
    """Golden-section search run in lockstep over many independent problems.

    ``f`` maps an array of abscissae (one per problem) to objective values.
    A fixed iteration count keeps every lane's work identical.
    """
    g = 1.0 - _GOLD  # 0.618...
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(n_iter):
        left = fc <= fd  # minimum lies in [a, d], else in [c, b]
        a, b = np.where(left, a, c), np.where(left, d, b)
        c, d = np.where(left, b - g * (b - a), d), np.where(left, c, a + g * (b - a))
        f_new = f(np.where(left, c, d))
        fc, fd = np.where(left, f_new, fd), np.where(left, fc, f_new)
    x = np.where(fc <= fd, c, d)
    return x, np.minimum(fc, fd)


def minimize_nd(
    f: Callable[[np.ndarray], float],
    start,
    settings: OptimizerSettings = ND_SETTINGS,
    step: float | np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """Nelder-Mead simplex search from ``start``.

    After convergence the search is restarted once from the best vertex with
    a fresh simplex; a collapsed simplex away from the optimum is the usual
    failure mode and a single restart removes it.
    """
    x0 = np.atleast_1d(np.asarray(start, dtype=float))
    f0 = f(x0)
    if not np.isfinite(f0):
        raise DomainError(f"objective is not finite at the starting point {x0}")
    x, fx = _nelder_mead(f, x0, f0, settings, step)
    x2, fx2 = _nelder_mead(f, x, fx, settings, step)
    if fx2 <= fx:
        x, fx = x2, fx2
    return x, fx


def _initial_simplex(x0: np.ndarray, step) -> np.ndarray:
    dim = x0.size
    simplex = np.tile(x0, (dim + 1, 1))
    if step is None:
        steps = 0.1 * np.maximum(np.abs(x0), 1.0)
    else:
        steps = np.broadcast_to(np.asarray(step, dtype=float), (dim,))
    for i in range(dim):
        simplex[i + 1, i] += steps[i]
    return simplex


def _nelder_mead(f, x0, f0, settings, step):
    dim = x0.size
    simplex = _initial_simplex(x0, step)
    fvals = np.empty(dim + 1)
    fvals[0] = f0
    for i in range(1, dim + 1):
        fvals[i] = f(simplex[i])

    for _ in range(settings.max_iters):
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        spread_x = np.max(np.abs(simplex[1:] - simplex[0]))
        spread_f = fvals[-1] - fvals[0]
        if spread_x <= settings.x_tol * (1.0 + np.max(np.abs(simplex[0]))) and (
            spread_f <= settings.f_tol * (1.0 + abs(fvals[0]))
        ):
            break

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + NM_REFLECT * (centroid - worst)
        fr = f(xr)
        if fr < fvals[0]:
            xe = centroid + NM_EXPAND * (xr - centroid)
            fe = f(xe)
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-1]:
            xc = centroid + NM_CONTRACT * (xr - centroid)
            fc = f(xc)
            if fc <= fr:
                simplex[-1], fvals[-1] = xc, fc
                continue
        else:
            xc = centroid + NM_CONTRACT * (worst - centroid)
            fc = f(xc)
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
                continue
        simplex[1:] = simplex[0] + NM_SHRINK * (simplex[1:] - simplex[0])
        for i in range(1, dim + 1):
            fvals[i] = f(simplex[i])

    i = int(np.argmin(fvals))
    return simplex[i].copy(), float(fvals[i])
