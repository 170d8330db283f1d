"""Morrey, weak Morrey, Lebesgue and Lorentz norms of catalog functions.

Radial functions are handled through their power-log profile, so ball
masses, level sets and rearrangements come out in closed form.  Suprema
over radii combine a dense log grid (refined locally) with the exact
power-law envelopes at ``r -> 0`` and ``r -> inf``: a grid maximum alone
would silently truncate a norm that blows up at either end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import integrate as _sp_integrate
from scipy import optimize as _sp_opt
from scipy import special as _sp

from . import quad
from .catalog import (
    RadialProfile,
    TestFunction,
    ball_intersection_volume,
    limit_at,
    piece_sup,
    radial_profile,
    sphere_in_ball,
    unit_ball_volume,
)
from .quad import Piece
from .scale import ScaleFunction

INFINITE = math.inf
FAMILIES = ("morrey", "weak_morrey", "lorentz", "lebesgue", "weak_lebesgue")


@dataclass(frozen=True)
class SpaceSpec:
    """A function space.

    Morrey-type spaces take either a scale ``Psi`` (generalized norm
    ``|B|^(-1/p) Psi(r)^(-1) ||f||``) or a classical ``lam`` (norm
    ``r^(-lam/p) ||f||``).  The classical norm is the generalized one for
    ``Psi = t^((lam-n)/p)`` times ``factor = v_n^(1/p)``.  For Lorentz
    spaces ``p`` is the first index ``kappa`` and ``secondary`` the second.
    """

    family: str
    p: float
    n: int = 1
    scale: ScaleFunction | None = None
    lam: float | None = None
    secondary: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown space family {self.family!r}")
        if self.family == "lorentz":
            if not (self.p > 0 and self.secondary is not None and self.secondary > 0):
                raise ValueError("Lorentz indices must be positive")
        elif self.p < 1:
            raise ValueError("p must be >= 1")
        if self.family in ("morrey", "weak_morrey"):
            if (self.scale is None) == (self.lam is None):
                raise ValueError("give exactly one of scale or lam")
            if self.lam is not None and not (0 <= self.lam <= self.n):
                raise ValueError("classical lam must lie in [0, n]")

    @classmethod
    def morrey(cls, p: float, n: int = 1, *, lam: float | None = None,
               scale: ScaleFunction | None = None) -> "SpaceSpec":
        return cls("morrey", float(p), n, scale, lam)

    @classmethod
    def weak_morrey(cls, p: float, n: int = 1, *, lam: float | None = None,
                    scale: ScaleFunction | None = None) -> "SpaceSpec":
        return cls("weak_morrey", float(p), n, scale, lam)

    @classmethod
    def lorentz(cls, kappa: float, p: float, n: int = 1) -> "SpaceSpec":
        return cls("lorentz", float(kappa), n, secondary=float(p))

    @property
    def psi(self) -> ScaleFunction:
        if self.scale is not None:
            return self.scale
        return ScaleFunction.classical(self.lam, self.p, self.n)

    @property
    def factor(self) -> float:
        return unit_ball_volume(self.n) ** (1.0 / self.p) if self.lam is not None else 1.0

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"family": self.family, "p": self.p, "n": self.n}
        if self.scale is not None:
            d["scale"] = self.scale.to_dict()
        if self.lam is not None:
            d["lambda"] = self.lam
        if self.secondary is not None:
            d["secondary"] = "inf" if math.isinf(self.secondary) else self.secondary
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SpaceSpec":
        scale = d.get("scale")
        sec = d.get("secondary")
        return cls(str(d["family"]), float(d["p"]), int(d.get("n", 1)),
                   ScaleFunction.from_dict(scale) if scale is not None else None,
                   None if d.get("lambda") is None else float(d["lambda"]),
                   None if sec is None else (math.inf if sec == "inf" else float(sec)))


@dataclass(frozen=True)
class NormReport:
    space: dict
    value: float
    center: tuple[float, ...] | None = None
    r: float | None = None
    t: float | None = None
    note: str = ""

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def to_dict(self) -> dict[str, Any]:
        return {"space": self.space, "value": "infinite" if math.isinf(self.value) else self.value,
                "witness": {"center": None if self.center is None else list(self.center),
                            "r": self.r, "t": self.t},
                "note": self.note}


# --------------------------------------------------------------------------
# level sets of radial profiles
# --------------------------------------------------------------------------

def _segments(pc: Piece) -> list[tuple[float, float]]:
    """Split a piece's interval into monotone stretches."""
    if pc.logpow != 0.0 and pc.power != 0.0:
        u = pc.logpow / pc.power
        if u > 0:
            s = math.exp(-u)
            if pc.lo < s < pc.hi:
                return [(pc.lo, s), (s, pc.hi)]
    return [(pc.lo, pc.hi)]


def _solve_level(pc: Piece, lo: float, hi: float, y: float) -> float:
    """The ``s`` in ``(lo, hi)`` where the monotone piece crosses ``y``."""
    if pc.logpow == 0.0 and pc.power != 0.0:
        return (y / pc.coef) ** (1.0 / pc.power)

    def g(x):
        return math.log(pc.value(math.exp(x))) - math.log(y)
    x_hi = math.log(hi) if math.isfinite(hi) else None
    x_lo = math.log(lo) if lo > 0 else None
    if x_hi is not None and x_hi == 0.0:
        x_hi = -1e-300
    if x_lo is None:
        x_lo = (x_hi if x_hi is not None else 0.0) - 1.0
        while g(x_lo) * g(x_hi) > 0:
            x_lo = 2 * x_lo - 1.0
    if x_hi is None:
        x_hi = x_lo + 1.0
        while g(x_lo) * g(x_hi) > 0:
            x_hi = 2 * x_hi + 1.0
    return math.exp(_sp_opt.brentq(g, x_lo, x_hi, xtol=1e-300, rtol=1e-15, maxiter=500))


def superlevel_intervals(pieces: Sequence[Piece], y: float) -> list[tuple[float, float]]:
    """Radii ``s`` where the piecewise profile exceeds ``y > 0``."""
    out: list[tuple[float, float]] = []
    for pc in pieces:
        for lo, hi in _segments(pc):
            v_lo, v_hi = limit_at(pc, lo), limit_at(pc, hi)
            if v_lo > y and v_hi > y:
                out.append((lo, hi))
            elif v_lo > y:
                out.append((lo, _solve_level(pc, lo, hi, y)))
            elif v_hi > y:
                out.append((_solve_level(pc, lo, hi, y), hi))
    out.sort()
    merged: list[tuple[float, float]] = []
    for lo, hi in out:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        elif hi > lo:
            merged.append((lo, hi))
    return merged


def _bump_levels(f: TestFunction) -> list[tuple[float, float, np.ndarray]]:
    """``(value of |f|, radius, center)`` per bump, highest first."""
    return sorted(((h ** (1.0 / f.p_root), rad, c) for c, rad, h in f.bumps()), key=lambda q: -q[0])


# --------------------------------------------------------------------------
# distribution function and rearrangement
# --------------------------------------------------------------------------

def distribution_function(f: TestFunction, sigma: float, weight: float = 0.0) -> float:
    """``sigma^weight |{|f| > sigma}|``; ``inf`` when the level set has infinite measure.

    The weight is applied in log space so tiny levels with huge level sets stay finite.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    v = unit_ball_volume(f.n)
    if f.kind == "bumpsum":
        return sigma**weight * sum(v * rad**f.n for h, rad, _ in _bump_levels(f) if h > sigma)
    prof = radial_profile(f)
    shift = weight * math.log(sigma)
    total = 0.0
    for lo, hi in superlevel_intervals(prof.pieces, sigma**prof.root):
        if math.isinf(hi):
            return math.inf
        e_out = shift + f.n * math.log(hi)
        if e_out > 709.0:
            return math.inf
        outer = math.exp(e_out)
        inner = math.exp(shift + f.n * math.log(lo)) if lo > 0 else 0.0
        total += v * (outer - inner)
    return total


@dataclass(frozen=True)
class RearrangementProfile:
    """Closed-form ``f*``.

    ``radial``: ``f*(t) = phi((t/v_n)^(1/n))`` with ``phi**root`` in ``pieces``.
    ``steps``: ``f*`` equals ``value`` on ``[t_lo, t_hi)``.
    ``shifted_power``: ``f*(t) = (1 + t/v_n)^(-g/n)``.
    """

    kind: str
    n: int
    pieces: tuple[Piece, ...] = ()
    root: float = 1.0
    steps: tuple[tuple[float, float, float], ...] = ()
    g: float = 0.0
    total_support: float = 0.0
    breakpoints: tuple[float, ...] = field(default=())

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        v = unit_ball_volume(self.n)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if self.kind == "radial":
                out = RadialProfile(self.pieces, self.root, self.n)((t / v) ** (1.0 / self.n))
                # f*(0) is the essential supremum, not the profile value at the origin
                head = limit_at(self.pieces[0], 0.0) ** (1.0 / self.root) if self.pieces else 0.0
                return np.where(t == 0, head, out)
            if self.kind == "shifted_power":
                return (1.0 + t / v) ** (-self.g / self.n)
        out = np.zeros_like(t)
        for lo, hi, val in self.steps:
            out = np.where((t >= lo) & (t < hi), val, out)
        return out


def decreasing_rearrangement(f: TestFunction) -> RearrangementProfile:
    n, v = f.n, unit_ball_volume(f.n)
    if f.kind == "bumpsum":
        steps, t = [], 0.0
        for h, rad, _ in _bump_levels(f):
            w = v * rad**n
            steps.append((t, t + w, h))
            t += w
        return RearrangementProfile("steps", n, steps=tuple(steps), total_support=t,
                                    breakpoints=tuple(s[1] for s in steps))
    if f.kind == "tail_power":
        if f.g <= 0:
            raise ValueError("tail power with g <= 0 has no decreasing rearrangement")
        return RearrangementProfile("shifted_power", n, g=f.g, total_support=math.inf)
    prof = radial_profile(f)
    if not prof.nonincreasing:
        raise ValueError("closed-form rearrangement needs a nonincreasing profile")
    outer = prof.outer_radius
    bps = tuple(v * b**n for b in prof.breakpoints)
    return RearrangementProfile("radial", n, pieces=prof.pieces, root=prof.root,
                                total_support=v * outer**n if prof.pieces else 0.0,
                                breakpoints=bps)


def lebesgue_integral(f: TestFunction, p: float) -> float:
    """``int |f|^p`` over the whole space."""
    if f.kind == "bumpsum":
        v = unit_ball_volume(f.n)
        return sum(hgt ** (p / f.p_root) * v * rad**f.n for _, rad, hgt in f.bumps())
    prof = radial_profile(f)
    omega = f.n * unit_ball_volume(f.n)
    return omega * quad.moment(prof.power(p), f.n - 1.0)


def lorentz_norm(f: TestFunction, kappa: float, p: float) -> float:
    """``(int (t^(1/kappa) f*(t))^p dt/t)^(1/p)``, sup form for ``p = inf``."""
    if kappa <= 0 or p <= 0:
        raise ValueError("Lorentz indices must be positive")
    if f.kind == "zero":
        return 0.0
    rp = decreasing_rearrangement(f)
    n, v = f.n, unit_ball_volume(f.n)
    if rp.kind == "steps":
        if math.isinf(p):
            return max(val * hi ** (1.0 / kappa) for lo, hi, val in rp.steps)
        e = p / kappa
        return sum(val**p * (hi**e - lo**e) / e for lo, hi, val in rp.steps) ** (1.0 / p)
    if rp.kind == "shifted_power":
        # t = v u: int t^(p/kappa - 1) (1 + t/v)^(-g p/n) dt = v^(p/kappa) B(p/kappa, g p/n - p/kappa)
        a = 1.0 / kappa
        b = rp.g / n
        if math.isinf(p):
            if a > b:
                return INFINITE
            # sup_u (v u)^a (1+u)^(-b), critical point u = a/(b-a)
            if a == b:
                return v**a
            u = a / (b - a)
            return (v * u) ** a * (1 + u) ** (-b)
        x, y = p * a, p * b - p * a
        if not (x > 0 and y > 0):
            return INFINITE
        return (v**x * float(_sp.beta(x, y))) ** (1.0 / p)
    # radial: t = v s^n, dt/t = n ds/s
    if math.isinf(p):
        scaled = [Piece(pc.lo, pc.hi, pc.coef, pc.power + n * rp.root / kappa, pc.logpow)
                  for pc in rp.pieces]
        best = max(piece_sup(pc) for pc in scaled)
        return INFINITE if math.isinf(best) else v ** (1.0 / kappa) * best ** (1.0 / rp.root)
    pcs = [pc.pow(p / rp.root) for pc in rp.pieces]
    val = quad.moment(pcs, n * p / kappa - 1.0)
    if math.isinf(val):
        return INFINITE
    return (n * v ** (p / kappa) * val) ** (1.0 / p)


# --------------------------------------------------------------------------
# ball masses
# --------------------------------------------------------------------------

def ball_mass(pieces: Sequence[Piece], n: int, d: float, r: float) -> float:
    """``int_{B(x, r)} g(|y - c|) dy`` with ``|x - c| = d``."""
    if not pieces or r <= 0:
        return 0.0
    omega = n * unit_ball_volume(n)
    if d == 0.0:
        return omega * quad.moment(pieces, n - 1.0, 0.0, r)
    if all(pc.is_constant for pc in pieces):
        return sum(pc.coef * (ball_intersection_volume(n, pc.hi, r, d)
                              - ball_intersection_volume(n, pc.lo, r, d)) for pc in pieces)
    if n == 1:
        total = quad.moment(pieces, 0.0, max(0.0, d - r), d + r)
        if r > d:
            total += quad.moment(pieces, 0.0, 0.0, r - d)
        return total
    total = 0.0
    if r > d:
        total += omega * quad.moment(pieces, n - 1.0, 0.0, r - d)
    lo, hi = abs(r - d), r + d
    brk = [b for pc in pieces for b in (pc.lo, pc.hi) if math.isfinite(b)]

    def fn(s):
        return sum(pc.value(s) for pc in pieces if pc.lo < s < pc.hi) * sphere_in_ball(n, s, d, r)
    return total + quad.quad_singular(fn, lo, hi, brk)


def _level_mass(level_sets: Sequence[tuple[float, float]], n: int, d: float, r: float) -> float:
    """``|B(x, r) cap union of shells lo < |y - c| < hi|``."""
    return sum(ball_intersection_volume(n, hi, r, d) - ball_intersection_volume(n, lo, r, d)
               for lo, hi in level_sets)


# --------------------------------------------------------------------------
# envelopes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Envelope:
    """``G(r) ~ coef * r^power * |ln r|^logpow`` at one end."""

    coef: float
    power: float
    logpow: float = 0.0

    def limit(self, at: str) -> float:
        if self.coef == 0.0:
            return 0.0
        e, l = quad.snap(self.power), quad.snap(self.logpow)
        if at == "zero":
            e = -e
        if e > 0 or (e == 0 and l > 0):
            return INFINITE
        if e == 0 and l == 0:
            return self.coef
        return 0.0


def _mass_asymptotics_zero(pieces: Sequence[Piece], n: int) -> tuple[float, float, float] | None:
    """``int_{B(0,r)} g ~ c r^k |ln r|^l`` as ``r -> 0``; None when locally divergent."""
    if not pieces or pieces[0].lo > 0:
        return 0.0, 0.0, 0.0
    pc = pieces[0]
    omega = n * unit_ball_volume(n)
    k = quad.snap(pc.power + n)
    if k > 0:
        return omega * pc.coef / k, k, pc.logpow
    if k == 0 and pc.logpow < -1:
        return omega * pc.coef / -(pc.logpow + 1), 0.0, pc.logpow + 1
    return None


def _mass_asymptotics_inf(pieces: Sequence[Piece], n: int) -> tuple[float, float, float]:
    omega = n * unit_ball_volume(n)
    if not pieces:
        return 0.0, 0.0, 0.0
    last = pieces[-1]
    if math.isinf(last.hi):
        k = quad.snap(last.power + n)
        if k > 0:
            return omega * last.coef / k, k, 0.0
        if k == 0:
            return omega * last.coef, 0.0, 1.0
    return omega * quad.moment(pieces, n - 1.0), 0.0, 0.0


def _strong_envelopes(mass0, mass_inf, psi: ScaleFunction, n: int, p: float):
    v = unit_ball_volume(n)
    out = []
    for (mc, mk, ml), at in ((mass0, "zero"), (mass_inf, "inf")):
        c, a, b = psi.asymptotics(at)
        out.append(Envelope((mc / v) ** (1.0 / p) / c, (mk - n) / p - a, ml / p - b))
    return out


def _radius_grid(scales: Sequence[float], points: int = 241) -> np.ndarray:
    pos = [s for s in scales if 0 < s < math.inf] or [1.0]
    lo, hi = min(pos) * 1e-8, max(pos) * 1e8
    return np.unique(np.concatenate([np.geomspace(lo, hi, points), pos]))


def _sup_over_r(G, grid: np.ndarray) -> tuple[float, float]:
    vals = np.array([G(r) for r in grid])
    i = int(np.argmax(vals))
    best, r_best = float(vals[i]), float(grid[i])
    lo = math.log(grid[max(i - 1, 0)])
    hi = math.log(grid[min(i + 1, len(grid) - 1)])
    if hi > lo:
        res = _sp_opt.minimize_scalar(lambda x: -G(math.exp(x)), bounds=(lo, hi), method="bounded",
                                      options={"xatol": 1e-10})
        if -res.fun > best:
            best, r_best = float(-res.fun), float(math.exp(res.x))
    return best, r_best


def _combine(grid_best: float, r_best: float, envs: Sequence[Envelope]) -> tuple[float, float | None]:
    lim0, lim_inf = envs[0].limit("zero"), envs[1].limit("inf")
    if math.isinf(lim0):
        return INFINITE, 0.0
    if math.isinf(lim_inf):
        return INFINITE, math.inf
    best, r = grid_best, r_best
    if lim0 > best:
        best, r = lim0, 0.0
    if lim_inf > best:
        best, r = lim_inf, math.inf
    return best, r


# --------------------------------------------------------------------------
# Morrey norms
# --------------------------------------------------------------------------

def _candidate_centers(f: TestFunction, r: float) -> list[np.ndarray]:
    n = f.n
    axis = np.zeros(n)
    axis[0] = 1.0
    out = [np.zeros(n)]
    for c, pcs in f.components(1.0):
        out.append(c)
        for pc in pcs:
            for b in (pc.lo, pc.hi):
                if 0 < b < math.inf:
                    for off in (b - r, b + r, b):
                        if off > 0:
                            out.append(c + off * axis)
                            out.append(c - off * axis)
    return out


def _nonradial_sup(f: TestFunction, local, psi: ScaleFunction, p: float) -> tuple[float, np.ndarray, float]:
    """``sup_{x,r} |B|^(-1/p) Psi(r)^(-1) local(x, r)`` over candidate centers."""
    v = unit_ball_volume(f.n)
    scales = [b for c, pcs in f.components(1.0) for pc in pcs for b in (pc.lo, pc.hi)]
    scales += [float(np.linalg.norm(c)) for c, _ in f.components(1.0)]
    best, xb, rb = 0.0, np.zeros(f.n), 0.0
    grid = _radius_grid(scales, 121)
    for r in grid:
        norm = (v * r**f.n) ** (-1.0 / p) / psi(float(r))
        for x in _candidate_centers(f, float(r)):
            val = norm * local(x, float(r))
            if val > best:
                best, xb, rb = val, x, float(r)
    if best > 0:
        def neg(z):
            r = math.exp(z[0])
            x = xb.copy()
            x[0] = z[1]
            return -(v * r**f.n) ** (-1.0 / p) / psi(r) * local(x, r)
        span = 2.0 * rb + max(abs(float(xb[0])), 1.0)
        box = [(math.log(grid[0]), math.log(grid[-1])), (xb[0] - span, xb[0] + span)]
        res = _sp_opt.minimize(neg, [math.log(rb), xb[0]], method="Nelder-Mead", bounds=box,
                               options={"xatol": 1e-12, "fatol": 1e-14 * best})
        if -res.fun > best:
            best, rb = float(-res.fun), float(math.exp(res.x[0]))
            xb = xb.copy()
            xb[0] = res.x[1]
    return best, xb, rb


def _bounded_envelopes(f: TestFunction, psi: ScaleFunction, p: float, sup_value: float,
                       mass_inf) -> list[Envelope]:
    c0, a0, b0 = psi.asymptotics("zero")
    env0 = Envelope(sup_value / c0 if sup_value > 0 else 0.0, -a0, -b0)
    v = unit_ball_volume(f.n)
    ci, ai, bi = psi.asymptotics("inf")
    mc, mk, ml = mass_inf
    env_inf = Envelope((mc / v) ** (1.0 / p) / ci, (mk - f.n) / p - ai, ml / p - bi)
    return [env0, env_inf]


def morrey_norm(f: TestFunction, spec: SpaceSpec) -> NormReport:
    """Generalized or classical Morrey norm; ``inf`` when it is not finite."""
    if spec.family != "morrey":
        raise ValueError("morrey_norm needs a morrey space")
    if spec.n != f.n:
        raise ValueError("space and function dimensions differ")
    p, psi, n = spec.p, spec.psi, f.n
    if f.kind == "zero":
        return NormReport(spec.to_dict(), 0.0)
    if not f.locally_integrable(p):
        return NormReport(spec.to_dict(), INFINITE, note="|f|^p not locally integrable")
    v = unit_ball_volume(n)
    prof = radial_profile(f)
    if isinstance(prof, RadialProfile) and prof.nonincreasing:
        pcs = prof.power(p)

        def G(r):
            m = ball_mass(pcs, n, 0.0, r)
            return (m / (v * r**n)) ** (1.0 / p) / psi(r)
        m0 = _mass_asymptotics_zero(pcs, n)
        envs = _strong_envelopes(m0, _mass_asymptotics_inf(pcs, n), psi, n, p)
        best, r = _combine(*_sup_over_r(G, _radius_grid(prof.breakpoints + _psi_breaks(psi))), envs)
        return NormReport(spec.to_dict(), spec.factor * best, tuple([0.0] * n), r)
    comps = f.components(p)

    def local(x, r):
        return sum(ball_mass(pcs, n, float(np.linalg.norm(x - c)), r) for c, pcs in comps) ** (1.0 / p)
    best, xb, rb = _nonradial_sup(f, local, psi, p)
    ess = f.ess_sup()
    envs = _bounded_envelopes(f, psi, p, ess, _total_mass_inf(f, p))
    value, r = _combine(best, rb, envs)
    return NormReport(spec.to_dict(), spec.factor * value, tuple(float(c) for c in xb), r,
                      note="candidate-center supremum")


def _psi_breaks(psi: ScaleFunction) -> list[float]:
    return [pc.hi for pc in psi.pieces() if math.isfinite(pc.hi)]


def _total_mass_inf(f: TestFunction, p: float):
    if f.kind == "bumpsum":
        return lebesgue_integral(f, p), 0.0, 0.0
    return _mass_asymptotics_inf(radial_profile(f).power(p), f.n)


# --------------------------------------------------------------------------
# weak Morrey norms
# --------------------------------------------------------------------------

def weak_morrey_norm(f: TestFunction, spec: SpaceSpec) -> NormReport:
    """``sup_{x,r} |B|^(-1/p) Psi(r)^(-1) sup_t t |{|f|>t} cap B|^(1/p)``."""
    if spec.family != "weak_morrey":
        raise ValueError("weak_morrey_norm needs a weak_morrey space")
    if spec.n != f.n:
        raise ValueError("space and function dimensions differ")
    p, psi, n = spec.p, spec.psi, f.n
    if f.kind == "zero":
        return NormReport(spec.to_dict(), 0.0)
    prof = radial_profile(f)
    if isinstance(prof, RadialProfile) and prof.nonincreasing:
        return _weak_radial(f, prof, spec)
    levels = _weak_levels(f)

    def local(x, r):
        best = 0.0
        for t, shells, c in levels:
            m = sum(_level_mass(sh, n, float(np.linalg.norm(x - cc)), r) for sh, cc in zip(shells, c))
            best = max(best, t * m ** (1.0 / p))
        return best
    best, xb, rb = _nonradial_sup(f, local, psi, p)
    envs = _bounded_envelopes(f, psi, p, f.ess_sup(), _weak_mass_inf(f, p))
    value, r = _combine(best, rb, envs)
    return NormReport(spec.to_dict(), spec.factor * value, tuple(float(c) for c in xb), r,
                      note="candidate-center supremum")


def _weak_levels(f: TestFunction, count: int = 96):
    """Levels ``t`` with the shells of ``{|f| > t}`` about each component center."""
    if f.kind == "bumpsum":
        bl = _bump_levels(f)
        out = []
        for j, (h, _, _) in enumerate(bl):
            top = bl[: j + 1]
            out.append((h, [[(0.0, rad)] for _, rad, _ in top], [c for _, _, c in top]))
        return out
    prof = radial_profile(f)
    top = max(piece_sup(pc) for pc in prof.pieces) ** (1.0 / prof.root)
    finite_top = top if math.isfinite(top) else 1e6
    ts = np.geomspace(finite_top * 1e-9, finite_top, count)
    origin = np.zeros(f.n)
    return [(float(t), [superlevel_intervals(prof.pieces, float(t) ** prof.root)], [origin]) for t in ts]


def _weak_mass_inf(f: TestFunction, p: float):
    """Asymptotics of ``sup_t t^p |{|f|>t} cap B(0,r)|`` as ``r -> inf``."""
    if f.kind == "bumpsum":
        v = unit_ball_volume(f.n)
        vals, acc = [], 0.0
        for h, rad, _ in _bump_levels(f):
            acc += v * rad**f.n
            vals.append(h**p * acc)
        return max(vals), 0.0, 0.0
    pcs = radial_profile(f).power(p)
    last = pcs[-1]
    v = unit_ball_volume(f.n)
    if math.isinf(last.hi):
        k = quad.snap(last.power + f.n)
        if k >= 0:
            return v * last.coef, k, 0.0
    return _weak_lp_power(f, p), 0.0, 0.0


def _weak_lp_power(f: TestFunction, p: float) -> float:
    """``sup_t t^p D_f(t)`` for a radial ``f`` by a level scan refined in ``log t``."""
    top = f.ess_sup()
    head = 0.0
    if math.isinf(top):
        # large levels: the superlevel set is a small ball about the origin
        first = radial_profile(f).power(p)[0]
        head = unit_ball_volume(f.n) * limit_at(first.scaled(1.0, f.n), 0.0)
        if math.isinf(head):
            return math.inf
        lo, hi = -12.0, 12.0
    else:
        lo, hi = math.log10(top) - 12.0, math.log10(top)

    def h(e):
        t = 10.0**e
        return t**p * distribution_function(f, t)
    es = np.linspace(lo, hi, 481)
    vals = [h(e) for e in es]
    i = int(np.argmax(vals))
    best = vals[i]
    if 0 < i < len(es) - 1:
        res = _sp_opt.minimize_scalar(lambda e: -h(e), bounds=(es[i - 1], es[i + 1]), method="bounded",
                                      options={"xatol": 1e-12})
        best = max(best, -res.fun)
    return max(best, head)


def _weak_radial(f: TestFunction, prof: RadialProfile, spec: SpaceSpec) -> NormReport:
    """Radial nonincreasing ``f``: ``W(r) = v_n^(1/p) sup_{s<=r} phi(s) s^(n/p)``."""
    p, psi, n = spec.p, spec.psi, f.n
    v = unit_ball_volume(n)
    hp = [pc.scaled(1.0, n) for pc in prof.power(p)]  # phi^p s^n

    def H(r):
        best = 0.0
        for pc in hp:
            q = pc.restrict(pc.lo, min(pc.hi, r))
            if q is None:
                continue
            best = max(best, piece_sup(q))
        return best

    def G(r):
        h = H(r)
        if math.isinf(h):
            return math.inf
        return (h / (v * r**n)) ** (1.0 / p) * v ** (1.0 / p) / psi(r)

    first = hp[0]
    if first.lo == 0.0:
        k = first.power
        if k < 0 or (k == 0 and first.logpow > 0):
            return NormReport(spec.to_dict(), INFINITE, note="weak L^p fails at the origin")
        env0 = (v * first.coef, k, first.logpow)
    else:
        env0 = (0.0, 0.0, 0.0)
    envs = _strong_envelopes(env0, _weak_mass_inf(f, p), psi, n, p)
    grid = _radius_grid(prof.breakpoints + _psi_breaks(psi))
    best, r = _combine(*_sup_over_r(G, grid), envs)
    return NormReport(spec.to_dict(), spec.factor * best, tuple([0.0] * n), r)


# --------------------------------------------------------------------------
# Lebesgue norms and layer cake
# --------------------------------------------------------------------------

def lebesgue_norm(f: TestFunction, p: float) -> float:
    val = lebesgue_integral(f, p)
    return INFINITE if math.isinf(val) else val ** (1.0 / p)


def weak_lebesgue_norm(f: TestFunction, p: float) -> float:
    """``sup_t t D_f(t)^(1/p)``, evaluated as the weak Morrey norm with ``lam = 0``."""
    return weak_morrey_norm(f, SpaceSpec.weak_morrey(p, f.n, lam=0.0)).value


def layer_cake(f: TestFunction, p: float) -> dict[str, float]:
    """``int |f|^p`` three ways: directly, from ``D_f`` and from ``f*``."""
    direct = lebesgue_integral(f, p)
    if math.isinf(direct):
        return {"direct": direct, "distribution": math.inf, "rearrangement": math.inf}
    rp = decreasing_rearrangement(f)
    top = f.ess_sup()
    brk_sigma = sorted({float(rp(np.array(b * side))) for b in rp.breakpoints if b > 0
                        for side in (1.0, 1.0 - 1e-12)})

    def dist(sig):
        return p * distribution_function(f, sig, p - 1.0) if sig > 0 else 0.0
    hi_sigma = top if math.isfinite(top) else math.inf
    if math.isinf(hi_sigma):
        via_d = quad.quad_singular(dist, 0.0, 1.0, brk_sigma) + _sp_quad_inf(dist, 1.0)
    else:
        via_d = quad.quad_singular(dist, 0.0, hi_sigma, brk_sigma)

    def rear(t):
        return float(rp(np.array(t))) ** p
    supp = rp.total_support
    if math.isinf(supp):
        via_r = quad.quad_singular(rear, 0.0, 1.0, list(rp.breakpoints)) + _sp_quad_inf(rear, 1.0)
    else:
        via_r = quad.quad_singular(rear, 0.0, supp, list(rp.breakpoints))
    return {"direct": direct, "distribution": via_d, "rearrangement": via_r}


def _sp_quad_inf(fn, a: float) -> float:
    val, _ = _sp_integrate.quad(fn, a, math.inf, epsrel=1e-12, epsabs=0.0, limit=400)
    return val


def norm(f: TestFunction, spec: SpaceSpec) -> NormReport:
    """Dispatch on the space family."""
    if spec.family == "morrey":
        return morrey_norm(f, spec)
    if spec.family == "weak_morrey":
        return weak_morrey_norm(f, spec)
    if spec.family == "lorentz":
        return NormReport(spec.to_dict(), lorentz_norm(f, spec.p, spec.secondary))
    if spec.family == "lebesgue":
        return NormReport(spec.to_dict(), lebesgue_norm(f, spec.p))
    return NormReport(spec.to_dict(), weak_lebesgue_norm(f, spec.p))
