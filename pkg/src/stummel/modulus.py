"""Stummel p-modulus, modulus curves and class membership.

``eta(f, p, psi, r)`` is the supremum over centers ``x`` of

    ( int_{|x-y| < r} |f(y)|^p Psi(|x-y|) / |x-y|^n dy )^(1/p).

For a radial nonincreasing ``f`` and a nonincreasing kernel ``Psi(t)/t^n``
the supremum sits at the origin and the integral is a closed-form radial
moment.  Everything else goes through a candidate-center search built
from the function's singular structure.  For each center the integral
is split into the radial components of ``|f|^p`` and evaluated in
polar coordinates about the center: exactly when the pieces are constant
or ``n = 1``, otherwise by quadrature over the spherical means.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize as _sp_opt

from . import quad
from .catalog import (
    RadialProfile,
    TestFunction,
    radial_profile,
    sphere_in_ball,
    unit_ball_volume,
)
from .quad import DIVERGENT, DimensionTooLarge, Piece
from .scale import ScaleFunction, check_conditions

MEMBER = "member"
NON_MEMBER = "non_member"
INCONCLUSIVE = "inconclusive"

VANISH_RATIO = 1e-3
N_PERTURB = 32
DEFAULT_GRID = (1e-12, 1e2, 48)


class UndefinedOnDivergent(ValueError):
    pass


def log_grid(r_min: float = DEFAULT_GRID[0], r_max: float = DEFAULT_GRID[1],
             points: int = DEFAULT_GRID[2]) -> np.ndarray:
    if not (0 < r_min < r_max) or points < 2:
        raise ValueError("grid needs 0 < r_min < r_max and at least 2 points")
    return np.geomspace(r_min, r_max, points)


# --------------------------------------------------------------------------
# one component of |f|^p about one center
# --------------------------------------------------------------------------

_GAUSS = np.polynomial.legendre.leggauss(48)


def _kernel_between(psi_pcs: Sequence[Piece], lo: float, hi: float) -> float:
    """``int_lo^hi Psi(t)/t dt``."""
    lo = max(lo, 0.0)
    if hi <= lo:
        return 0.0
    return quad.moment(psi_pcs, -1.0, lo, hi)


def _psi_eval(psi_pcs: Sequence[Piece], t: float) -> float:
    for pc in psi_pcs:
        if pc.lo < t <= pc.hi or (t == pc.hi == math.inf):
            return pc.value(t)
    return psi_pcs[-1].value(t)


def _ball_kernel_mass(n: int, psi_pcs, d: float, R: float, r: float) -> float:
    """``int_{B(x, r) cap B(c, R)} Psi(|x-y|)/|x-y|^n dy`` with ``|x - c| = d``."""
    if R <= 0 or r <= 0:
        return 0.0
    if math.isinf(R):
        return n * unit_ball_volume(n) * _kernel_between(psi_pcs, 0.0, r)
    if n == 1:
        total = 0.0
        if R > d:
            total += _kernel_between(psi_pcs, 0.0, min(r, R - d))
        lo, hi = max(0.0, d - R), min(r, d + R)
        if hi > lo:
            total += _kernel_between(psi_pcs, lo, hi)
        return total
    omega = n * unit_ball_volume(n)
    total = 0.0
    if R > d:
        total += omega * _kernel_between(psi_pcs, 0.0, min(r, R - d))
        if math.isinf(total):
            return DIVERGENT
    lo, hi = abs(R - d), min(r, R + d)
    if hi > lo and d >= 2 * R and not any(lo < pc.hi < hi for pc in psi_pcs):
        return total + _far_cap_mass(n, psi_pcs, d, R, r)
    if hi > lo:
        floor = 1e-200 * max(d, R)

        def fn(t):
            if t < floor:
                return 0.0
            return _psi_eval(psi_pcs, t) * (sphere_in_ball(n, t, d, R) / t ** (n - 1)) / t
        brk = [pc.hi for pc in psi_pcs]
        total += quad.quad_singular(fn, lo, hi, brk)
    return total


def _far_cap_mass(n: int, psi_pcs, d: float, R: float, r: float) -> float:
    """Kernel mass of ``B(x, r) cap B(c, R)`` when the kernel is smooth over the ball.

    With ``t = d - R cos(phi)`` the sphere-in-ball measure loses its
    square-root endpoints, so fixed-order Gauss-Legendre is accurate.
    """
    phi_hi = math.pi if r >= d + R else math.acos((d - r) / R)
    x, w = _GAUSS
    phi = 0.5 * phi_hi * (x + 1.0)
    t = d - R * np.cos(phi)
    one_minus = np.clip((R * np.sin(phi)) ** 2 / (2.0 * t * d), 0.0, 2.0)
    if n == 2:
        shell = 2.0 * t * (2.0 * np.arcsin(np.sqrt(one_minus / 2.0)))
    elif n == 3:
        shell = 2.0 * math.pi * t * t * one_minus
    else:
        shell = np.array([sphere_in_ball(n, float(ti), d, R) for ti in t])
    psi = np.array([_psi_eval(psi_pcs, float(ti)) for ti in t])
    vals = psi * shell / t**n * R * np.sin(phi)
    return float(0.5 * phi_hi * np.dot(w, vals))


_ARC_COARSE = np.polynomial.legendre.leggauss(64)
_ARC_FINE = np.polynomial.legendre.leggauss(128)


def _arc_gauss(active: Sequence[Piece], dm: float, q: float, a: float, b: float, rule) -> float:
    """Gauss-Legendre ``int_a^b g(rho(th)) dth`` for the pieces active on the whole arc."""
    x, w = rule
    th = a + 0.5 * (b - a) * (x + 1.0)
    rho = np.sqrt(dm * dm + q * np.sin(0.5 * th) ** 2)
    vals = np.zeros_like(rho)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        for pc in active:
            v = pc.coef * rho**pc.power
            if pc.logpow != 0.0:
                v = v * np.abs(np.log(rho)) ** pc.logpow
            vals = vals + v
    return float(0.5 * (b - a) * np.dot(w, vals))


def _outside(b: float, d: float, t: float, q: float, th: float) -> int:
    """Sign of ``rho(th)^2 - b^2`` from differences that are exact near tangency."""
    if b == 0.0:
        return 1
    if math.isinf(b):
        return -1
    val = q * math.sin(0.5 * th) ** 2 - (t - (d - b)) * ((b + d) - t)
    return (val > 0) - (val < 0)


def _spherical_mass(pieces: Sequence[Piece], n: int, d: float, t: float) -> float:
    """``int_{S(x, t)} g(|y - c|) dsigma(y)`` for ``g`` given by ``pieces``."""
    if n == 1:
        return _piece_sum(pieces, abs(d - t)) + _piece_sum(pieces, d + t)
    if d == 0.0:
        return n * unit_ball_volume(n) * t ** (n - 1) * _piece_sum(pieces, t)
    if n == 3:
        lo, hi = abs(t - d), t + d
        return 2.0 * math.pi * t / d * quad.moment(pieces, 1.0, lo, hi)
    if n == 2:
        # rho^2 = (d - t)^2 + 4 t d sin^2(th/2); piece membership is fixed per arc
        dm, q = d - t, 4.0 * t * d
        brk = []
        for pc in pieces:
            for b in (pc.lo, pc.hi):
                if 0 < b < math.inf:
                    s2 = (t - (d - b)) * ((b + d) - t) / q
                    if 0.0 < s2 < 1.0:
                        brk.append(2.0 * math.asin(math.sqrt(s2)))
        edges = sorted({0.0, math.pi, *brk})
        total = 0.0
        for a, b in zip(edges, edges[1:]):
            mid = 0.5 * (a + b)
            active = [pc for pc in pieces
                      if _outside(pc.lo, d, t, q, mid) > 0 and _outside(pc.hi, d, t, q, mid) < 0]
            if not active:
                continue
            coarse = _arc_gauss(active, dm, q, a, b, _ARC_COARSE)
            fine = _arc_gauss(active, dm, q, a, b, _ARC_FINE)
            if math.isfinite(fine) and abs(fine - coarse) <= 1e-13 * abs(fine):
                total += fine
            else:
                def fn(th, active=active):
                    rho = math.sqrt(dm * dm + q * math.sin(0.5 * th) ** 2)
                    return sum(pc.value(rho) for pc in active)
                total += quad.quad_singular(fn, a, b)
        return 2.0 * t * total
    raise DimensionTooLarge("off-center spherical means need n <= 3")


def _piece_sum(pieces: Sequence[Piece], s: float) -> float:
    total = 0.0
    for pc in pieces:
        if pc.lo < s < pc.hi:
            total += pc.value(s)
    return total


def _one_sided(pieces, s: float, side: int) -> float:
    eps = 1e-12 * max(s, 1e-300)
    return _piece_sum(pieces, s + side * eps)


def component_integral(pieces: Sequence[Piece], n: int, psi_pcs: Sequence[Piece],
                       d: float, r: float) -> float:
    """``int_{B(x, r)} g(|y - c|) Psi(|x-y|)/|x-y|^n dy`` with ``|x - c| = d``."""
    if not pieces or r <= 0:
        return 0.0
    omega = n * unit_ball_volume(n)
    if d == 0.0:
        return omega * quad.moment(quad.multiply(pieces, psi_pcs), -1.0, 0.0, r)
    if all(pc.is_constant for pc in pieces):
        total = 0.0
        for pc in pieces:
            if pc.coef == 0.0:
                continue
            outer = _ball_kernel_mass(n, psi_pcs, d, pc.hi, r)
            inner = _ball_kernel_mass(n, psi_pcs, d, pc.lo, r)
            if math.isinf(outer):
                return DIVERGENT
            total += pc.coef * (outer - inner)
        return total
    return _numeric_component(pieces, n, psi_pcs, d, r, omega)


def _numeric_component(pieces, n, psi_pcs, d, r, omega):
    bounds = sorted({0.0, *(b for pc in pieces for b in (pc.lo, pc.hi) if math.isfinite(b))})
    gap = min(abs(d - b) for b in bounds if b != d) if any(b != d for b in bounds) else r
    t1 = min(r, 0.5 * gap)
    g_mean = 0.5 * (_one_sided(pieces, d, -1) + _one_sided(pieces, d, +1))
    total = 0.0
    if g_mean > 0.0:
        head = omega * g_mean * _kernel_between(psi_pcs, 0.0, t1)
        if math.isinf(head):
            return DIVERGENT
        total += head

        def near(t):
            # the remainder is O((t/d)^2) relative to the subtracted head
            if t < 1e-100 * d:
                return 0.0
            m = _spherical_mass(pieces, n, d, t) - omega * t ** (n - 1) * g_mean
            return _psi_eval(psi_pcs, t) * (m / t ** (n - 1)) / t
        total += quad.quad_singular(near, 0.0, t1, [pc.hi for pc in psi_pcs], epsabs=1e-13 * head)
    else:
        def near0(t):
            m = _spherical_mass(pieces, n, d, t)
            return 0.0 if m == 0.0 else _psi_eval(psi_pcs, t) * (m / t ** (n - 1)) / t
        total += quad.quad_singular(near0, 0.0, t1, [pc.hi for pc in psi_pcs])
    if r > t1:
        brk = [pc.hi for pc in psi_pcs]
        for b in bounds:
            brk += [abs(d - b), d + b]

        def far(t):
            return _psi_eval(psi_pcs, t) * t**-n * _spherical_mass(pieces, n, d, t)
        total += quad.quad_singular(far, t1, r, brk)
    return total


# --------------------------------------------------------------------------
# the modulus
# --------------------------------------------------------------------------

class ModulusProblem:
    """``|f|^p`` against the kernel ``Psi(t)/t^n``, ready for evaluation."""

    def __init__(self, f: TestFunction, p: float, psi: ScaleFunction, seed: int = 0):
        if p < 1:
            raise ValueError("p must be >= 1")
        self.f, self.p, self.psi, self.n = f, float(p), psi, f.n
        self.components = f.components(p)
        self.psi_pcs = psi.pieces()
        if self.psi_pcs[0].lo > 0:
            raise ValueError("the scale must be defined down to 0")
        self.seed = seed
        prof = radial_profile(f)
        self.origin_path = (
            isinstance(prof, RadialProfile)
            and prof.nonincreasing
            and check_conditions(psi, f.n).kernel_nonincreasing
        )
        self._best: np.ndarray | None = None

    def integral_at(self, x, r: float) -> float:
        x = np.asarray(x, dtype=float)
        total = 0.0
        for c, pcs in self.components:
            d = float(np.linalg.norm(x - c))
            v = component_integral(pcs, self.n, self.psi_pcs, d, r)
            if math.isinf(v):
                return DIVERGENT
            total += v
        return total

    def integrand(self, x):
        """Point-evaluable integrand for the Monte-Carlo oracle at center ``x``."""
        x = np.asarray(x, dtype=float)

        def fn(pts):
            z = np.linalg.norm(pts - x, axis=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                fv = self.f.evaluate(pts) ** self.p
                out = fv * self.psi(np.where(z > 0, z, 1.0)) / np.where(z > 0, z, 1.0) ** self.n
            return np.where((z > 0) & (fv > 0), out, 0.0)
        return fn

    # candidate search -------------------------------------------------

    def _candidates(self, r: float) -> list[np.ndarray]:
        n = self.n
        origin = np.zeros(n)
        cands = [origin]
        centers = [c for c, _ in self.components]
        cands += centers
        axis = np.zeros(n)
        axis[0] = 1.0
        for c, pcs in self.components:
            for pc in pcs:
                for b in (pc.lo, pc.hi):
                    if 0 < b < math.inf:
                        for off in (b - r, b, b + r, b - 0.5 * r, b + 0.5 * r):
                            if off > 0:
                                cands.append(c + off * axis)
                                if self.f.kind == "bumpsum":
                                    cands.append(c - off * axis)
        srt = sorted(centers, key=lambda c: float(c[0]))
        cands += [0.5 * (a + b) for a, b in zip(srt, srt[1:])]
        if self._best is not None:
            cands.append(self._best)
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, int(abs(math.log(r)) * 1e6)]))
        base = list(cands)
        for _ in range(N_PERTURB):
            b = base[rng.integers(len(base))]
            u = rng.standard_normal(n)
            u *= rng.random() ** (1.0 / n) / np.linalg.norm(u)
            cands.append(b + r * u)
        return cands

    def _refine(self, x0: np.ndarray, r: float, value: float, span: float) -> tuple[float, np.ndarray]:
        base = x0.copy()

        def neg(s):
            x = base.copy()
            x[0] = s
            v = self.integral_at(x, r)
            return -v if math.isfinite(v) else -1e308
        res = _sp_opt.minimize_scalar(neg, bounds=(x0[0] - span, x0[0] + span), method="bounded",
                                      options={"xatol": 1e-12 * max(abs(x0[0]), span)})
        if -res.fun > value:
            x = base.copy()
            x[0] = res.x
            return -res.fun, x
        return value, x0

    def sup(self, r: float) -> tuple[float, np.ndarray]:
        """``(sup_x integral, argmax center)``."""
        if not self.components:
            return 0.0, np.zeros(self.n)
        if self.origin_path:
            return self.integral_at(np.zeros(self.n), r), np.zeros(self.n)
        best_v, best_x = -1.0, None
        scored = []
        for x in self._candidates(r):
            v = self.integral_at(x, r)
            if math.isinf(v):
                self._best = x
                return DIVERGENT, x
            scored.append((v, x))
            if v > best_v:
                best_v, best_x = v, x
        scored.sort(key=lambda q: -q[0])
        for v, x in scored[:3]:
            v2, x2 = self._refine(x, r, v, 0.5 * r)
            if v2 > best_v:
                best_v, best_x = v2, x2
        self._best = best_x
        return float(best_v), best_x

    def eta(self, r: float) -> float:
        if r <= 0:
            raise ValueError("r must be positive")
        v, _ = self.sup(r)
        return DIVERGENT if math.isinf(v) else v ** (1.0 / self.p)


def eta(f: TestFunction, p: float, psi: ScaleFunction, r: float, seed: int = 0) -> float:
    """Stummel p-modulus at radius ``r``; ``inf`` when the integral diverges."""
    return ModulusProblem(f, p, psi, seed).eta(r)


@dataclass(frozen=True)
class ModulusCurve:
    r_grid: tuple[float, ...]
    values: tuple[float, ...]
    p: float
    psi: ScaleFunction
    f: TestFunction
    centers: tuple[tuple[float, ...], ...] = field(default=(), repr=False)

    @property
    def finite(self) -> bool:
        return all(math.isfinite(v) for v in self.values)

    @property
    def status(self) -> list[str]:
        return ["finite" if math.isfinite(v) else "divergent" for v in self.values]

    def divergent_at(self) -> float | None:
        for r, v in zip(self.r_grid, self.values):
            if math.isinf(v):
                return r
        return None

    def rows(self) -> list[tuple[float, float, str]]:
        return list(zip(self.r_grid, self.values, self.status))


def modulus_curve(f: TestFunction, p: float, psi: ScaleFunction, grid=None, seed: int = 0) -> ModulusCurve:
    """``eta`` over an increasing radius grid (default 48 log points in [1e-12, 1e2])."""
    grid = log_grid() if grid is None else np.asarray(grid, dtype=float)
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be positive and strictly increasing")
    prob = ModulusProblem(f, p, psi, seed)
    vals, centers = [], []
    for i, r in enumerate(grid):
        v, x = prob.sup(float(r))
        if math.isinf(v):
            rest = len(grid) - i
            vals += [DIVERGENT] * rest
            centers += [tuple(x)] * rest
            break
        vals.append(v ** (1.0 / prob.p))
        centers.append(tuple(float(c) for c in x))
    return ModulusCurve(tuple(float(r) for r in grid), tuple(vals), float(p), psi, f, tuple(centers))


# --------------------------------------------------------------------------
# membership
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MembershipVerdict:
    status: str
    space: str
    limit_estimate: float | None = None
    lower_bound: float | None = None
    divergent_at: float | None = None
    upper_bound: float | None = None
    certificate: str = ""

    def to_dict(self) -> dict:
        enc = lambda v: "inf" if isinstance(v, float) and math.isinf(v) else v  # noqa: E731
        return {
            "space": self.space, "status": self.status, "certificate": self.certificate,
            "evidence": {"limit_estimate": enc(self.limit_estimate),
                         "lower_bound": enc(self.lower_bound),
                         "upper_bound": enc(self.upper_bound),
                         "divergent_at": self.divergent_at},
        }


def bump_lower_bound(f: TestFunction, p: float, psi: ScaleFunction, r_min: float) -> float | None:
    """Proven ``inf_r eta(r)`` over ``r >= r_min`` for the bump sum with ``Psi = c t^alpha``.

    Centering the ball on bump ``k`` with ``8^-k <= r`` gives
    ``eta^p >= c omega / alpha``; valid only when the grid stays above the
    smallest bump radius.
    """
    if f.kind != "bumpsum" or psi.kind == "tabulated" or psi.log_power != 0.0:
        return None
    if abs(psi.a - f.alpha) > 1e-12 or r_min < 8.0**-f.K:
        return None
    omega = f.n * unit_ball_volume(f.n)
    return (psi.scale_const * omega / f.alpha) ** (1.0 / p)


def _tail_slope(curve: ModulusCurve, m: int = 16) -> float | None:
    r = np.array(curve.r_grid[:m])
    v = np.array(curve.values[:m])
    ok = np.isfinite(v) & (v > 0)
    if ok.sum() < 4:
        return None
    return float(np.polyfit(np.log(r[ok]), np.log(v[ok]), 1)[0])


def _upper_certificate(f: TestFunction, p: float, psi: ScaleFunction, prob: ModulusProblem,
                       curve: ModulusCurve) -> tuple[str, float | None]:
    """Analytic reasons for ``eta(r) -> 0``."""
    if prob.origin_path and curve.finite:
        # eta^p is a convergent integral from 0: absolutely continuous in r
        return "convergent radial integral at the supremum center", curve.values[0]
    sup = f.ess_sup()
    if math.isfinite(sup) and check_conditions(psi, f.n).integrable:
        omega = f.n * unit_ball_volume(f.n)
        bound = sup * (omega * quad.moment(psi.pieces(), -1.0, 0.0, curve.r_grid[0])) ** (1.0 / p)
        return "bounded function with integrable scale", bound
    return "", None


def classify(f: TestFunction, p: float, psi_or_alpha, grid=None, seed: int = 0,
             curve: ModulusCurve | None = None) -> tuple[MembershipVerdict, MembershipVerdict]:
    """Verdicts for ``S_{p,Psi}`` (vanishing modulus) and the bounded class."""
    psi = (psi_or_alpha if isinstance(psi_or_alpha, ScaleFunction)
           else ScaleFunction.pure_power(float(psi_or_alpha)))
    if curve is None:
        grid = log_grid() if grid is None else np.asarray(grid, dtype=float)
        if grid[0] > 1e-8:
            raise ValueError("classification needs a grid reaching r_min <= 1e-8")
        curve = modulus_curve(f, p, psi, grid, seed)
    prob = ModulusProblem(f, p, psi, seed)
    tag = f"p={p:g}, psi={psi.to_dict()}"
    s_name, b_name = f"S[{tag}]", f"S~[{tag}]"
    div = curve.divergent_at()
    if div is not None:
        return (MembershipVerdict(NON_MEMBER, s_name, curve.values[0], divergent_at=div,
                                  certificate="divergent modulus integral"),
                MembershipVerdict(NON_MEMBER, b_name, curve.values[0], divergent_at=div,
                                  certificate="divergent modulus integral"))
    bounded = MembershipVerdict(MEMBER, b_name, curve.values[0], upper_bound=float(max(curve.values)),
                                certificate="finite on the whole grid")
    lower = bump_lower_bound(f, p, psi, curve.r_grid[0])
    if lower is not None and min(curve.values) >= lower * (1 - 1e-12):
        return (MembershipVerdict(NON_MEMBER, s_name, curve.values[0], lower_bound=lower,
                                  certificate="bump centered ball keeps the modulus away from zero"),
                bounded)
    why, upper = _upper_certificate(f, p, psi, prob, curve)
    if why:
        return MembershipVerdict(MEMBER, s_name, curve.values[0], upper_bound=upper,
                                 certificate=why), bounded
    v0, v1 = curve.values[0], curve.values[-1]
    slope = _tail_slope(curve)
    if v1 == 0.0 or (v0 < VANISH_RATIO * v1 and slope is not None and slope > 0):
        return MembershipVerdict(MEMBER, s_name, v0, certificate="numeric vanishing test"), bounded
    return MembershipVerdict(INCONCLUSIVE, s_name, v0, certificate="no certificate"), bounded


def doubling_check(curve: ModulusCurve, seed: int = 0) -> float:
    """``max_r eta(2r)/eta(r)`` over the curve's grid (0/0 counts as 1)."""
    if not curve.finite:
        raise UndefinedOnDivergent("doubling ratio undefined on a divergent curve")
    prob = ModulusProblem(curve.f, curve.p, curve.psi, seed)
    worst = 1.0
    for r, v in zip(curve.r_grid, curve.values):
        v2 = prob.eta(2.0 * r)
        if math.isinf(v2):
            raise UndefinedOnDivergent(f"modulus diverges at {2 * r}")
        if v == 0.0:
            if v2 > 0.0:
                return math.inf
            continue
        worst = max(worst, v2 / v)
    return worst
