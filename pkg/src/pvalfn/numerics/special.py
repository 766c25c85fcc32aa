"""Distribution functions built on the regularized incomplete gamma function.

Everything here is scalar and pure Python so that results are bit-stable
across platforms; only ``math.lgamma``/``math.log``/``math.exp`` are used.
"""

from __future__ import annotations

import math

_EPS = 1e-16
_TINY = 1e-300
_MAX_TERMS = 10_000


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


def _gamma_series(a: float, x: float) -> float:
    # P(a, x) by its power series; converges fast for x < a + 1.
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_TERMS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cont_frac(a: float, x: float) -> float:
    # Q(a, x) by the modified Lentz continued fraction; used for x >= a + 1.
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma function P(a, x)."""
    if a <= 0:
        raise DomainError(f"shape must be positive, got {a}")
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_cont_frac(a, x)


def gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma function Q(a, x) = 1 - P(a, x).

    Computed directly in the tail so that small upper probabilities keep
    their relative precision.
    """
    if a <= 0:
        raise DomainError(f"shape must be positive, got {a}")
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cont_frac(a, x)


def chisq1_cdf(x: float) -> float:
    """P(X <= x) for X ~ ChiSq(1)."""
    if x < 0 or math.isnan(x):
        raise DomainError(f"chi-square argument must be >= 0, got {x}")
    return gamma_p(0.5, 0.5 * x)


def chisq1_sf(x: float) -> float:
    """Upper tail 1 - chisq1_cdf(x), accurate far into the tail."""
    if x < 0 or math.isnan(x):
        raise DomainError(f"chi-square argument must be >= 0, got {x}")
    return gamma_q(0.5, 0.5 * x)


def beta_n1_cdf(x: float, n: int) -> float:
    """Beta(n, 1) distribution function, which is simply x**n on [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"Beta(n,1) argument must lie in [0, 1], got {x}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return x**n


def beta_n1_quantile(p: float, n: int) -> float:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {p}")
    return p ** (1.0 / n)


def gamma_cdf(x: float, shape: float, scale: float) -> float:
    """Gamma(shape, scale) distribution function."""
    if scale <= 0:
        raise DomainError(f"scale must be positive, got {scale}")
    if shape <= 0:
        raise DomainError(f"shape must be positive, got {shape}")
    if x <= 0:
        if x < 0:
            raise DomainError(f"x must be nonnegative, got {x}")
        return 0.0
    return gamma_p(shape, x / scale)


def gamma_sf(x: float, shape: float, scale: float) -> float:
    if scale <= 0:
        raise DomainError(f"scale must be positive, got {scale}")
    if x <= 0:
        return 1.0
    return gamma_q(shape, x / scale)


def normal_cdf(z: float) -> float:
    """Standard normal distribution function.

    Uses Phi(z) = (1 + sign(z) P(1/2, z^2/2)) / 2, switching to the upper
    incomplete gamma for negative z so the lower tail is not cancelled away.
    """
    if math.isnan(z):
        raise DomainError("normal_cdf of NaN")
    h = 0.5 * z * z
    if z < 0:
        return 0.5 * gamma_q(0.5, h)
    return 1.0 - 0.5 * gamma_q(0.5, h)


def _normal_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


# Acklam's rational approximation, refined below by Halley steps.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        return num / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    if p > 1.0 - _P_LOW:
        q = math.sqrt(-2.0 * math.log1p(-p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        return -num / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    q = p - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    return num / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)


def normal_quantile(p: float) -> float:
    """Inverse of :func:`normal_cdf` on (0, 1)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"quantile probability must lie in (0, 1), got {p}")
    x = _acklam(p)
    for _ in range(2):
        # Work with the smaller tail to keep the residual meaningful.
        if x < 0:
            err = 0.5 * gamma_q(0.5, 0.5 * x * x) - p
        else:
            err = (1.0 - p) - 0.5 * gamma_q(0.5, 0.5 * x * x)
        u = err / _normal_pdf(x)
        x = x - u / (1.0 + 0.5 * x * u)
    return x
