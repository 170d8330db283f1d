"""Upper incomplete gamma function for arbitrary real shape.

Power-log integrals reduce to Gamma(s, x) = int_x^inf u^(s-1) e^(-u) du
under the substitution u = -ln t, and the shapes that show up are often
zero or negative (log exponents b <= -1), which the regularized routines
in most libraries refuse.  This module evaluates the unregularized
function directly:

* s > 1/2, x < s + 1  -> Gamma(s) minus the lower series
* x >= s + 1        -> modified Lentz continued fraction (x >= 1 when s <= 0)
* otherwise         -> a cancellation-free series at a shape in (-1/2, 1/2],
  then downward recurrence
"""
from __future__ import annotations

import math
import sys

from scipy.special import zeta as _zeta

TOL = 1e-14
MAX_ITER = 100_000
_TINY = sys.float_info.min / sys.float_info.epsilon
_EULER = 0.57721566490153286060651209
_ZETA = [math.nan, math.nan] + [float(_zeta(k)) for k in range(2, 120)]


class IncompleteGammaError(ArithmeticError):
    pass


def _lower_series(s: float, x: float, tol: float) -> float:
    # gamma(s, x) = x^s e^-x sum_k x^k / (s (s+1) ... (s+k))
    term = 1.0 / s
    total = term
    ap = s
    for _ in range(MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * tol:
            return total * math.exp(-x + s * math.log(x))
    raise IncompleteGammaError(f"series did not converge for s={s}, x={x}")


def _upper_cf(s: float, x: float, tol: float) -> float:
    b = x + 1.0 - s
    c = 1.0 / _TINY
    d = 1.0 / b if b != 0.0 else 1.0 / _TINY
    h = d
    for i in range(1, MAX_ITER):
        an = -i * (i - s)
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
        if abs(delta - 1.0) < tol:
            return math.exp(-x + s * math.log(x)) * h
    raise IncompleteGammaError(f"continued fraction did not converge for s={s}, x={x}")


def exp1(x: float, tol: float = TOL) -> float:
    """Exponential integral E1(x) = Gamma(0, x) for x > 0."""
    if x <= 0.0:
        raise ValueError("E1 needs x > 0")
    if x >= 1.0:
        return _upper_cf(0.0, x, tol)
    total = 0.0
    term = 1.0
    for k in range(1, MAX_ITER):
        term *= -x / k
        inc = term / k
        total += inc
        if abs(inc) < tol * max(abs(total), 1e-300):
            break
    return -_EULER - math.log(x) - total


def upper_gamma(s: float, x: float, tol: float = TOL) -> float:
    """Unregularized upper incomplete gamma Gamma(s, x), real s, x > 0.

    Returns 0.0 when the result underflows.
    """
    if x <= 0.0:
        raise ValueError("upper_gamma needs x > 0")
    if math.isinf(x):
        return 0.0
    # nonpositive shapes converge slowly in the fraction for small x
    if x >= s + 1.0 and (s > 0.0 or x >= 1.0):
        if -x + s * math.log(x) < -745.0:
            return 0.0
        return _upper_cf(s, x, tol)
    if s > 0.5:
        return math.gamma(s) - _lower_series(s, x, tol)
    # shapes near zero or a negative integer: start from a in (-1/2, 1/2]
    # with a cancellation-free form, then recur down
    m = max(0, math.ceil(-s - 0.5))
    shape = s + m
    value = _small_shape(shape, x, tol)
    for _ in range(m):
        shape -= 1.0
        value = (value - math.exp(-x + shape * math.log(x))) / shape
    return value


def _gamma1p_minus_one_over(a: float) -> float:
    """``(Gamma(1 + a) - 1) / a`` for ``|a| <= 1/2``, smooth through ``a = 0``."""
    # ln Gamma(1 + a) = -euler a + sum_{k>=2} zeta(k) (-a)^k / k
    lg = -_EULER * a
    term = -a
    for k in range(2, 120):
        term *= -a
        inc = _ZETA[k] * term / k
        lg += inc
        if abs(inc) <= 1e-17 * abs(lg):
            break
    if a == 0.0:
        return -_EULER
    return math.expm1(lg) / a


def _small_shape(a: float, x: float, tol: float) -> float:
    # Gamma(a, x) = (Gamma(1+a) - 1)/a - (x^a - 1)/a - x^a sum_{k>=1} (-x)^k / (k! (a + k))
    lx = math.log(x)
    xa_minus_one = lx if a == 0.0 else math.expm1(a * lx) / a
    total = 0.0
    term = 1.0
    for k in range(1, MAX_ITER):
        term *= -x / k
        inc = term / (a + k)
        total += inc
        if abs(inc) <= tol * max(abs(total), 1e-300):
            break
    return _gamma1p_minus_one_over(a) - xa_minus_one - math.exp(a * lx) * total
