"""Integration kernel.

Everything the analyzer integrates reduces, after polar coordinates, to
finite sums of power-log monomials ``c * s**(a-1) * |ln s|**b``.  Those
have closed forms through the incomplete gamma function, and whether the
integral from 0 converges is decided by the exponents alone.  Adaptive
Gauss panels back up the cases without a usable closed form, and a
stratified Monte-Carlo integrator over balls serves as an independent
oracle for the radial reduction.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _sp_integrate

from .special import upper_gamma

DIVERGENT = math.inf
EXP_TOL = 1e-12
RTOL = 1e-10


class NonconvergentQuadrature(RuntimeError):
    """Adaptive panels exhausted their budget without meeting tolerance."""


class DimensionTooLarge(ValueError):
    pass


def snap(x: float) -> float:
    """Round exponents within EXP_TOL of zero to exactly zero."""
    return 0.0 if abs(x) < EXP_TOL else x


@dataclass(frozen=True)
class Term:
    """``coef * s**(a-1) * |ln s|**b``."""

    coef: float
    a: float
    b: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.coef):
            raise ValueError(f"non-finite coefficient {self.coef}")
        object.__setattr__(self, "a", snap(float(self.a)))
        object.__setattr__(self, "b", snap(float(self.b)))

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = self.coef * s ** (self.a - 1.0)
        if self.b != 0.0:
            out = out * np.abs(np.log(s)) ** self.b
        return out


@dataclass(frozen=True)
class RadialIntegrand:
    """A finite power-log sum supported on ``[s_min, s_max]``."""

    terms: tuple[Term, ...]
    s_max: float = math.inf
    s_min: float = 0.0

    def __post_init__(self):
        merged: dict[tuple[float, float], float] = {}
        for t in self.terms:
            key = (t.a, t.b)
            merged[key] = merged.get(key, 0.0) + t.coef
        terms = tuple(Term(c, a, b) for (a, b), c in sorted(merged.items()) if c != 0.0)
        object.__setattr__(self, "terms", terms)
        if self.s_min < 0 or self.s_max < self.s_min:
            raise ValueError("need 0 <= s_min <= s_max")
        if self.s_max > 1.0 and any(t.b != 0.0 for t in terms):
            raise ValueError("log terms must live inside (0, 1)")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        total = np.zeros_like(s)
        inside = (s > self.s_min) & (s < self.s_max)
        for t in self.terms:
            total = total + np.where(inside, t(np.where(inside, s, 0.5)), 0.0)
        return total


def diverges_at_zero(a: float, b: float) -> bool:
    """Exponent test for ``int_0 s**(a-1) |ln s|**b ds``."""
    a = snap(a)
    return a < 0.0 or (a == 0.0 and b >= -1.0)


def diverges_at_infinity(a: float, b: float = 0.0) -> bool:
    a = snap(a)
    return a > 0.0 or (a == 0.0 and b >= -1.0)


def integrate_term(term: Term, lo: float, hi: float) -> float:
    """Integral of one monomial over ``[lo, hi]``; ``inf`` when divergent."""
    if hi <= lo or term.coef == 0.0:
        return 0.0
    c, a, b = term.coef, term.a, term.b
    if lo == 0.0 and diverges_at_zero(a, b):
        return DIVERGENT
    if math.isinf(hi) and diverges_at_infinity(a, b):
        return DIVERGENT
    if b == 0.0:
        if a == 0.0:
            return c * math.log(hi / lo)
        hi_a = 0.0 if (math.isinf(hi) and a < 0) else hi**a
        lo_a = 0.0 if lo == 0.0 else lo**a
        return c * (hi_a - lo_a) / a
    if hi > 1.0 or (hi == 1.0 and b <= -1.0):
        raise ValueError("log monomials must be integrated inside (0, 1)")
    u_hi = -math.log(hi) if hi < 1.0 else 0.0
    u_lo = math.inf if lo == 0.0 else -math.log(lo)
    if a > 0.0:
        s = b + 1.0
        g_hi = upper_gamma(s, a * u_hi) if u_hi > 0 else _gamma_at_zero(s)
        g_lo = 0.0 if math.isinf(u_lo) else upper_gamma(s, a * u_lo)
        return c * a ** (-s) * (g_hi - g_lo)
    if a == 0.0:
        if b == -1.0:
            return c * math.log(u_lo / u_hi)
        s = b + 1.0
        top = 0.0 if math.isinf(u_lo) else u_lo**s
        return c * (top - u_hi**s) / s
    # a < 0 on a finite interval away from zero: no convenient closed form
    return c * adaptive_panels(lambda x: x ** (a - 1.0) * np.abs(np.log(x)) ** b, lo, hi)


def _gamma_at_zero(s: float) -> float:
    if s <= 0.0:
        return math.inf
    return math.gamma(s)


def integrate_radial(ig: RadialIntegrand, r: float) -> float:
    """``int_{s_min}^{min(r, s_max)} ig(s) ds``; ``inf`` when divergent."""
    if r <= 0:
        raise ValueError("r must be positive")
    hi = min(r, ig.s_max)
    total = 0.0
    for t in ig.terms:
        v = integrate_term(t, ig.s_min, hi)
        if math.isinf(v):
            return DIVERGENT
        total += v
    return total


_GL_LO = np.polynomial.legendre.leggauss(10)
_GL_HI = np.polynomial.legendre.leggauss(20)


def _gl(fn, x0, x1, rule):
    nodes, weights = rule
    mid, half = 0.5 * (x0 + x1), 0.5 * (x1 - x0)
    x = mid + half * nodes
    return half * float(np.dot(weights, fn(x)))


def adaptive_panels(fn: Callable, lo: float, hi: float, rtol: float = RTOL,
                    max_panels: int = 20_000) -> float:
    """Adaptive Gauss-Legendre on dyadic panels in ``log s``.

    ``fn`` must be vectorized and finite on ``[lo, hi]`` with ``lo > 0``.
    """
    if not (0 < lo < hi < math.inf):
        raise ValueError("adaptive_panels needs 0 < lo < hi < inf")

    def g(x):
        s = np.exp(x)
        return fn(s) * s

    x0, x1 = math.log(lo), math.log(hi)
    n0 = max(1, math.ceil((x1 - x0) / math.log(2.0)))
    edges = np.linspace(x0, x1, n0 + 1)
    stack = [(edges[i], edges[i + 1]) for i in range(n0)]
    coarse = sum(_gl(g, a, b, _GL_HI) for a, b in stack)
    scale = abs(coarse)
    total = 0.0
    used = 0
    while stack:
        a, b = stack.pop()
        used += 1
        if used > max_panels:
            raise NonconvergentQuadrature(f"panel budget exhausted on [{lo}, {hi}]")
        q_lo = _gl(g, a, b, _GL_LO)
        q_hi = _gl(g, a, b, _GL_HI)
        if abs(q_hi - q_lo) <= rtol * max(scale, 1e-300) * (b - a) / (x1 - x0) or b - a < 1e-12:
            total += q_hi
        else:
            m = 0.5 * (a + b)
            stack.append((a, m))
            stack.append((m, b))
    return total


def quad_singular(fn: Callable[[float], float], a: float, b: float,
                  breaks: Sequence[float] = (), epsrel: float = 1e-10,
                  epsabs: float = 0.0) -> float:
    """Scalar quadrature tolerant of integrable endpoint singularities.

    The interval is cut at ``breaks``; each piece is split at its midpoint
    and each half mapped to log-distance from its outer endpoint, so power
    and log singularities at any cut become exponentially decaying tails.
    """
    pts = sorted({a, b, *(x for x in breaks if a < x < b)})
    epsabs /= 2 * max(1, len(pts) - 1)
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi - lo <= 0:
            continue
        mid = 0.5 * (lo + hi)
        total += _log_tail(fn, lo, mid - lo, +1, epsrel, epsabs)
        total += _log_tail(fn, hi, hi - mid, -1, epsrel, epsabs)
    return total


def _log_tail(fn, end, width, sign, epsrel, epsabs=0.0):
    if width <= 0:
        return 0.0

    def g(v):
        d = math.exp(v)
        t = end + sign * d
        if t == end:
            return 0.0
        return fn(t) * d

    # tiny intervals far from the origin are resolution-limited near 1e-8 relative;
    # quadpack then warns but its estimate is still the best available
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _sp_integrate.IntegrationWarning)
        val, _ = _sp_integrate.quad(g, -math.inf, math.log(width), epsrel=epsrel,
                                    epsabs=epsabs, limit=400)
    return val


# --------------------------------------------------------------------------
# Monte-Carlo oracle
# --------------------------------------------------------------------------

N_STRATA = 64
INNER_FRACTION = 1e-14


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    samples: int
    seed: int
    inner_radius: float = 0.0
    per_stratum: tuple = field(default=(), repr=False)


def unit_sphere_measure(n: int) -> float:
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def _directions(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    if n == 1:
        return rng.choice(np.array([-1.0, 1.0]), size=(m, 1))
    z = rng.standard_normal((m, n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def integrate_ball_mc(integrand: Callable[[np.ndarray], np.ndarray], center, r: float,
                      samples: int = 100_000, seed: int = 0) -> McEstimate:
    """Stratified Monte-Carlo estimate of ``int_{B(center, r)} integrand``.

    Radii are drawn log-uniformly inside 64 geometric shells covering
    ``[1e-14 r, r]`` (each shell with its own substream of ``seed``), and
    directions uniformly; the core ball of radius ``1e-14 r`` is excluded
    and reported as ``inner_radius``.  ``integrand`` maps an ``(m, n)``
    array of points to ``m`` values.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    n = center.shape[0]
    if n > 3:
        raise DimensionTooLarge(f"Monte-Carlo oracle supports n <= 3, got {n}")
    if samples < N_STRATA:
        raise ValueError(f"need at least {N_STRATA} samples")
    omega = unit_sphere_measure(n)
    edges = r * np.geomspace(INNER_FRACTION, 1.0, N_STRATA + 1)
    per = np.full(N_STRATA, samples // N_STRATA)
    per[-1] += samples - per.sum()
    streams = np.random.SeedSequence(seed).spawn(N_STRATA)
    value = 0.0
    var = 0.0
    parts = []
    for k in range(N_STRATA):
        rng = np.random.default_rng(streams[k])
        lo, hi = edges[k], edges[k + 1]
        width = math.log(hi / lo)
        rho = lo * np.exp(width * rng.random(per[k]))
        pts = center + rho[:, None] * _directions(rng, per[k], n)
        f = np.asarray(integrand(pts), dtype=float)
        # density of rho is 1/(rho*width); volume element omega rho^(n-1)
        w = np.where(f == 0.0, 0.0, f * omega * rho**n * width)
        mean = float(w.mean())
        sv = float(w.var(ddof=1)) / per[k] if per[k] > 1 else 0.0
        value += mean
        var += sv
        parts.append(mean)
    return McEstimate(value=value, std_error=math.sqrt(var), samples=int(samples),
                      seed=int(seed), inner_radius=float(edges[0]), per_stratum=tuple(parts))


# --------------------------------------------------------------------------
# Piecewise power-log densities
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Piece:
    """``coef * s**power * |ln s|**logpow`` on the open interval ``(lo, hi)``."""

    lo: float
    hi: float
    coef: float
    power: float = 0.0
    logpow: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "power", snap(float(self.power)))
        object.__setattr__(self, "logpow", snap(float(self.logpow)))
        if self.logpow != 0.0 and self.hi > 1.0:
            raise ValueError("log factors are only defined on (0, 1)")

    @property
    def is_constant(self) -> bool:
        return self.power == 0.0 and self.logpow == 0.0

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        inside = (s > self.lo) & (s < self.hi)
        ss = np.where(inside, s, 0.5 if self.hi <= 1.0 else max(self.lo, 0.0) + 1.0)
        val = self.coef * ss**self.power
        if self.logpow != 0.0:
            val = val * np.abs(np.log(ss)) ** self.logpow
        return np.where(inside, val, 0.0)

    def value(self, s: float) -> float:
        """Closed-form value (no support test), used for endpoint limits."""
        v = self.coef * s**self.power
        if self.logpow != 0.0:
            v *= abs(math.log(s)) ** self.logpow
        return v

    def pow(self, q: float) -> "Piece":
        return Piece(self.lo, self.hi, self.coef**q, self.power * q, self.logpow * q)

    def scaled(self, c: float, extra_power: float = 0.0) -> "Piece":
        return Piece(self.lo, self.hi, self.coef * c, self.power + extra_power, self.logpow)

    def restrict(self, lo: float, hi: float) -> "Piece | None":
        lo, hi = max(lo, self.lo), min(hi, self.hi)
        if hi <= lo:
            return None
        return Piece(lo, hi, self.coef, self.power, self.logpow)

    def times(self, other: "Piece") -> "Piece | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if hi <= lo:
            return None
        return Piece(lo, hi, self.coef * other.coef, self.power + other.power,
                     self.logpow + other.logpow)

    def moment(self, k: float, lo: float = 0.0, hi: float = math.inf) -> float:
        """``int piece(s) s**k ds`` over ``(lo, hi)`` intersected with the support."""
        p = self.restrict(lo, hi)
        if p is None:
            return 0.0
        return integrate_term(Term(p.coef, p.power + k + 1.0, p.logpow), p.lo, p.hi)


def multiply(left: Sequence[Piece], right: Sequence[Piece]) -> list[Piece]:
    out = []
    for x in left:
        for y in right:
            z = x.times(y)
            if z is not None:
                out.append(z)
    return sorted(out, key=lambda q: q.lo)


def moment(pieces: Sequence[Piece], k: float, lo: float = 0.0, hi: float = math.inf) -> float:
    total = 0.0
    for pc in pieces:
        v = pc.moment(k, lo, hi)
        if math.isinf(v):
            return DIVERGENT
        total += v
    return total


def as_integrand(pieces: Sequence[Piece], k: float) -> list[RadialIntegrand]:
    """Each piece times ``s**k`` as a :class:`RadialIntegrand`."""
    return [RadialIntegrand((Term(p.coef, p.power + k + 1.0, p.logpow),), s_max=p.hi, s_min=p.lo)
            for p in pieces]
