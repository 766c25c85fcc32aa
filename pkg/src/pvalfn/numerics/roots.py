"""Bracketed root finding: bisection safeguarded by inverse quadratic steps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from pvalfn.numerics.special import DomainError


class BracketError(ValueError):
    """The supplied interval does not bracket a sign change."""


@dataclass(frozen=True)
class OptimizerSettings:
    """Stopping rules shared by the root finder and the optimizers.

    ``x_tol`` is scaled by ``1 + |x|`` at the current iterate.
    """

    max_iters: int = 200
    x_tol: float = 1e-8
    f_tol: float = 1e-10

    def __post_init__(self):
        if self.max_iters < 1:
            raise DomainError(f"max_iters must be >= 1, got {self.max_iters}")
        if not (self.x_tol > 0 and self.f_tol > 0):
            raise DomainError("tolerances must be strictly positive")

    def xtol_at(self, x: float) -> float:
        return self.x_tol * (1.0 + abs(x))


DEFAULT_SETTINGS = OptimizerSettings()


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise BracketError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.f_lo * self.f_hi > 0 or math.isnan(self.f_lo) or math.isnan(self.f_hi):
            raise BracketError(
                f"no sign change on [{self.lo}, {self.hi}]: "
                f"f(lo)={self.f_lo}, f(hi)={self.f_hi}"
            )

    @classmethod
    def from_function(cls, f: Callable[[float], float], lo: float, hi: float) -> "Bracket":
        return cls(lo, hi, f(lo), f(hi))

    @property
    def width(self) -> float:
        return self.hi - self.lo


def shrink_bracket(
    f: Callable[[float], float],
    bracket: Bracket,
    settings: OptimizerSettings = DEFAULT_SETTINGS,
) -> tuple[Bracket, float]:
    """Shrink ``bracket`` around a sign change of ``f``.

    Returns the final bracket and the best root estimate. The bracket is kept
    valid on every step, so this also works for step functions (it then
    converges to the jump location).
    """
    a, b = bracket.lo, bracket.hi
    fa, fb = bracket.f_lo, bracket.f_hi
    if fa == 0.0:
        return bracket, a
    if fb == 0.0:
        return bracket, b

    for _ in range(settings.max_iters):
        mid = 0.5 * (a + b)
        if b - a <= settings.xtol_at(mid):
            break
        fm = f(mid)
        if abs(fm) <= settings.f_tol:
            return Bracket(a, b, fa, fb), mid
        # Inverse quadratic step through (a, mid, b), tried on the halved
        # bracket and kept off its edges.
        x = _iqi(a, fa, b, fb, mid, fm)
        if fa * fm < 0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
        if x is not None and a < x < b:
            margin = 0.05 * (b - a)
            x = min(max(x, a + margin), b - margin)
            fx = f(x)
            if abs(fx) <= settings.f_tol:
                return Bracket(a, b, fa, fb), x
            if fa * fx < 0:
                b, fb = x, fx
            else:
                a, fa = x, fx
    return Bracket(a, b, fa, fb), 0.5 * (a + b)


def _iqi(a, fa, b, fb, c, fc):
    if fa == fb or fa == fc or fb == fc:
        if fa != fb:
            return b - fb * (b - a) / (fb - fa)
        return None
    return (
        a * fb * fc / ((fa - fb) * (fa - fc))
        + b * fa * fc / ((fb - fa) * (fb - fc))
        + c * fa * fb / ((fc - fa) * (fc - fb))
    )


def find_root(
    f: Callable[[float], float],
    bracket: Bracket,
    settings: OptimizerSettings = DEFAULT_SETTINGS,
) -> float:
    """Root of a continuous ``f`` inside ``bracket``.

    Returns x with ``|f(x)| <= f_tol`` or a final bracket no wider than
    the scaled ``x_tol``; raises :class:`BracketError` if the bracket is
    invalid.
    """
    _, root = shrink_bracket(f, bracket, settings)
    return root
