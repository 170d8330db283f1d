"""Catalog of test functions with the metadata needed for exact reduction.

Radial members are stored as a piecewise power-log profile of
``phi(s)**p_root`` so that ``|f|**q`` for any ``q`` is again piecewise
power-log.  The bump sum is a finite union of disjoint constant bumps,
each of which is radial about its own center.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np
from scipy import special as _sp

from .quad import Piece
from .scale import ScaleFunction

KINDS = ("radial_powerlog", "tail_power", "bumpsum", "indicator", "zero")


class SingularPoint(ValueError):
    pass


# --------------------------------------------------------------------------
# geometry
# --------------------------------------------------------------------------

def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class Geometry:
    n: int
    v_n: float = field(init=False)
    omega: float = field(init=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be a positive integer")
        object.__setattr__(self, "v_n", unit_ball_volume(self.n))
        object.__setattr__(self, "omega", self.n * unit_ball_volume(self.n))

    def ball_volume(self, r: float) -> float:
        return self.v_n * r**self.n


def _cap_volume(n: int, R: float, h: float) -> float:
    if h <= 0:
        return 0.0
    if h >= 2 * R:
        return unit_ball_volume(n) * R**n
    if h > R:
        return unit_ball_volume(n) * R**n - _cap_volume(n, R, 2 * R - h)
    x = (2 * R * h - h * h) / (R * R)
    return 0.5 * unit_ball_volume(n) * R**n * float(_sp.betainc((n + 1) / 2, 0.5, x))


def ball_intersection_volume(n: int, R1: float, R2: float, d: float) -> float:
    """``|B(0, R1) cap B(c, R2)|`` with ``|c| = d``."""
    if R1 <= 0 or R2 <= 0:
        return 0.0
    if math.isinf(R1) or math.isinf(R2):
        if math.isinf(R1) and math.isinf(R2):
            return math.inf
        return unit_ball_volume(n) * min(R1, R2) ** n
    if d >= R1 + R2:
        return 0.0
    if d <= abs(R1 - R2):
        return unit_ball_volume(n) * min(R1, R2) ** n
    if n == 1:
        return max(0.0, min(R1, d + R2) - max(-R1, d - R2))
    x1 = (d * d + R1 * R1 - R2 * R2) / (2 * d)
    return _cap_volume(n, R1, R1 - x1) + _cap_volume(n, R2, R2 - (d - x1))


def sphere_in_ball(n: int, t: float, d: float, R: float) -> float:
    """Surface measure of ``S(x, t)`` inside ``B(c, R)`` where ``|x - c| = d``.

    In one dimension the sphere is the point pair ``x +- t`` with
    counting measure.
    """
    if t <= 0 or R <= 0:
        return 0.0
    if n == 1:
        return float(abs(d - t) < R) + float(d + t < R)
    full = n * unit_ball_volume(n) * t ** (n - 1)
    if t + d <= R:
        return full
    if t >= d + R or t <= d - R:
        return 0.0
    # half-angle form: 1 - cos(theta) = (R^2 - (t-d)^2) / (2td), no cancellation for small R
    one_minus = (R - (t - d)) * (R + (t - d)) / (2 * t * d)
    one_minus = min(2.0, max(0.0, one_minus))
    theta = 2.0 * math.asin(math.sqrt(one_minus / 2.0))
    if n == 2:
        return 2.0 * t * theta
    if n == 3:
        return 2.0 * math.pi * t * t * one_minus
    s2 = math.sin(theta) ** 2
    half = 0.5 * full * float(_sp.betainc((n - 1) / 2, 0.5, s2))
    return half if theta <= math.pi / 2 else full - half


# --------------------------------------------------------------------------
# profiles
# --------------------------------------------------------------------------

def piece_nonincreasing(pc: Piece) -> bool:
    if pc.coef == 0.0:
        return True
    if pc.logpow == 0.0:
        return pc.power <= 0.0
    # in u = -ln s the log of the piece is -power*u + logpow*ln u; need it nondecreasing
    u_hi = -math.log(pc.hi) if pc.hi < 1 else 0.0
    u_lo = math.inf if pc.lo == 0 else -math.log(pc.lo)
    if pc.logpow > 0:
        bound = 0.0 if math.isinf(u_lo) else pc.logpow / u_lo
    else:
        bound = -math.inf if u_hi == 0 else pc.logpow / u_hi
    return pc.power <= bound + 1e-15


@dataclass(frozen=True)
class RadialProfile:
    """``f(y) = phi(|y|)`` with ``phi(s)**root`` given by ``pieces``."""

    pieces: tuple[Piece, ...]
    root: float
    n: int

    @property
    def nonincreasing(self) -> bool:
        if not self.pieces:
            return True
        if self.pieces[0].lo > 0:
            return False
        if not all(piece_nonincreasing(pc) for pc in self.pieces):
            return False
        for left, right in zip(self.pieces, self.pieces[1:]):
            if right.lo > left.hi:
                return False
            if right.value(right.lo) > left.value(left.hi) * (1 + 1e-12):
                return False
        return True

    def power(self, q: float) -> list[Piece]:
        """Pieces of ``phi**q``."""
        return [pc.pow(q / self.root) for pc in self.pieces]

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for pc in self.pieces:
                out = out + pc(s)
            return out ** (1.0 / self.root)

    @property
    def breakpoints(self) -> list[float]:
        pts = set()
        for pc in self.pieces:
            pts.update([pc.lo, pc.hi])
        return sorted(x for x in pts if 0 < x < math.inf)

    @property
    def outer_radius(self) -> float:
        return max((pc.hi for pc in self.pieces), default=0.0)


@dataclass(frozen=True)
class NotRadial:
    centers: tuple[tuple[float, ...], ...]


# --------------------------------------------------------------------------
# test functions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """A catalog member.

    ``radial_powerlog``: ``(coef |y|^-g |ln|y||^-h)^(1/p_root)`` on ``|y| < R``.
    ``tail_power``: ``|y|^-g`` on ``|y| > 1``, zero inside.
    ``bumpsum``: ``(sum_k 8^(alpha k) 1_{B(x_k, 8^-k)})^(1/p_root)``, ``k = 3..K``,
    ``x_k = 2^-k e_1``.
    ``indicator``: ``1_{B(0, R)}``.
    """

    __test__ = False  # not a pytest class

    kind: str
    n: int = 1
    g: float = 0.0
    h: float = 0.0
    R: float = math.inf
    alpha: float = 0.0
    K: int = 0
    p_root: float = 1.0
    coef: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.p_root < 1:
            raise ValueError("p_root must be >= 1")
        if self.coef <= 0:
            raise ValueError("coef must be positive")
        if self.kind == "radial_powerlog" and self.h != 0.0 and not self.R < 1.0:
            raise ValueError("a log factor needs support radius R < 1")
        if self.kind in ("radial_powerlog", "indicator") and not self.R > 0:
            raise ValueError("support radius must be positive")
        if self.kind == "bumpsum":
            if self.K < 3:
                raise ValueError("bump sum needs K >= 3")
            if not self.alpha > 0:
                raise ValueError("bump sum needs alpha > 0")

    # factories ------------------------------------------------------------

    @classmethod
    def radial_powerlog(cls, n: int, g: float, h: float = 0.0, R: float = math.inf,
                        p_root: float = 1.0, coef: float = 1.0) -> "TestFunction":
        return cls("radial_powerlog", n=n, g=float(g), h=float(h), R=float(R),
                   p_root=float(p_root), coef=float(coef))

    @classmethod
    def power(cls, n: int, gamma: float, R: float = math.inf) -> "TestFunction":
        return cls.radial_powerlog(n, gamma, 0.0, R)

    @classmethod
    def tail_power(cls, n: int, g: float) -> "TestFunction":
        return cls("tail_power", n=n, g=float(g))

    @classmethod
    def bump_sum(cls, n: int, alpha: float, K: int | None = None, p_root: float = 1.0,
                 r_min: float = 1e-12) -> "TestFunction":
        if K is None:
            K = default_truncation(r_min)
        return cls("bumpsum", n=n, alpha=float(alpha), K=int(K), p_root=float(p_root))

    @classmethod
    def indicator(cls, n: int, R: float = 1.0) -> "TestFunction":
        return cls("indicator", n=n, R=float(R))

    @classmethod
    def zero(cls, n: int = 1) -> "TestFunction":
        return cls("zero", n=n)

    @classmethod
    def log_critical(cls, psi: ScaleFunction, p: float = 1.0, n: int = 1,
                     delta: float | None = None) -> "TestFunction":
        """``(1_{B(0, delta)} / (Psi(|y|) |ln|y||^2))^(1/p)``.

        ``delta`` defaults to :func:`log_square_radius`.
        """
        if delta is None:
            delta = log_square_radius(psi)
        c, a, b = psi.asymptotics("zero")
        if psi.kind == "powerlog" and psi.b != 0.0 and delta > psi.t0:
            raise ValueError("delta must stay inside the log range of psi")
        return cls.radial_powerlog(n, a, b + 2.0, delta, p_root=p, coef=1.0 / c)

    # descriptors ----------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind, "n": self.n}
        if self.kind == "radial_powerlog":
            d.update(g=self.g, h=self.h, R=_enc(self.R), p_root=self.p_root)
            if self.coef != 1.0:
                d["coef"] = self.coef
        elif self.kind == "tail_power":
            d.update(g=self.g)
        elif self.kind == "bumpsum":
            d.update(alpha=self.alpha, K=self.K, p_root=self.p_root)
        elif self.kind == "indicator":
            d.update(R=_enc(self.R))
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TestFunction":
        kind = str(d["kind"]).lower().replace("-", "_")
        kind = {"radialpowerlog": "radial_powerlog", "tailpower": "tail_power",
                "bump_sum": "bumpsum"}.get(kind.replace("_", "") if kind not in KINDS else kind, kind)
        n = int(d.get("n", 1))
        if kind == "radial_powerlog":
            return cls.radial_powerlog(n, d.get("g", 0.0), d.get("h", 0.0), _dec(d.get("R", math.inf)),
                                       d.get("p_root", 1.0), d.get("coef", 1.0))
        if kind == "tail_power":
            return cls.tail_power(n, d["g"])
        if kind == "bumpsum":
            return cls.bump_sum(n, d["alpha"], d.get("K"), d.get("p_root", 1.0),
                                d.get("r_min", 1e-12))
        if kind == "indicator":
            return cls.indicator(n, _dec(d.get("R", 1.0)))
        if kind == "zero":
            return cls.zero(n)
        raise ValueError(f"unknown function kind {d['kind']!r}")

    # structure ------------------------------------------------------------

    @property
    def geometry(self) -> Geometry:
        return Geometry(self.n)

    @property
    def is_radial(self) -> bool:
        return self.kind != "bumpsum"

    def profile(self) -> RadialProfile | NotRadial:
        return radial_profile(self)

    def bumps(self) -> list[tuple[np.ndarray, float, float]]:
        """``(center, radius, height of |f|^p_root)`` per bump."""
        if self.kind != "bumpsum":
            return []
        out = []
        for k in range(3, self.K + 1):
            c = np.zeros(self.n)
            c[0] = 2.0**-k
            out.append((c, 8.0**-k, 8.0 ** (self.alpha * k)))
        return out

    def components(self, q: float) -> list[tuple[np.ndarray, list[Piece]]]:
        """``|f|**q`` as a sum of pieces radial about their own centers."""
        if self.kind == "bumpsum":
            return [(c, [Piece(0.0, rad, hgt ** (q / self.p_root))]) for c, rad, hgt in self.bumps()]
        prof = radial_profile(self)
        if not prof.pieces:
            return []
        return [(np.zeros(self.n), prof.power(q))]

    @property
    def singular_centers(self) -> list[np.ndarray]:
        if self.kind == "bumpsum":
            return [c for c, _, _ in self.bumps()]
        if self.kind == "radial_powerlog" and (self.g > 0 or (self.g == 0 and self.h < 0)):
            return [np.zeros(self.n)]
        return []

    def ess_sup(self) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "indicator":
            return 1.0
        if self.kind == "bumpsum":
            return 8.0 ** (self.alpha * self.K / self.p_root)
        if self.kind == "tail_power":
            return 1.0 if self.g >= 0 else math.inf
        prof = radial_profile(self)
        best = 0.0
        for pc in prof.pieces:
            best = max(best, piece_sup(pc))
        return best ** (1.0 / prof.root)

    def locally_integrable(self, p: float) -> bool:
        """Exponent test for ``|f|^p`` near every point."""
        if self.kind in ("zero", "indicator", "bumpsum", "tail_power"):
            return True
        for pc in radial_profile(self).power(p):
            if pc.lo == 0.0:
                a = pc.power + self.n
                if a < 0 or (a == 0 and pc.logpow >= -1):
                    return False
        return True

    def evaluate(self, points) -> np.ndarray:
        """Vectorized values at an ``(m, n)`` array; ``inf`` at singular points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.n:
            raise ValueError(f"expected points of dimension {self.n}")
        if self.kind == "zero":
            return np.zeros(len(pts))
        if self.kind == "bumpsum":
            out = np.zeros(len(pts))
            for c, rad, hgt in self.bumps():
                inside = np.linalg.norm(pts - c, axis=1) < rad
                out = np.where(inside, out + hgt, out)
            return out ** (1.0 / self.p_root)
        s = np.linalg.norm(pts, axis=1)
        prof = radial_profile(self)
        return prof(s)


def _enc(x: float):
    return "inf" if math.isinf(x) else x


def _dec(x) -> float:
    return math.inf if x in ("inf", "Infinity", None) else float(x)


def piece_sup(pc: Piece) -> float:
    """Supremum of a power-log piece over its open interval."""
    vals = []
    for end in (pc.lo, pc.hi):
        vals.append(limit_at(pc, end))
    if pc.logpow != 0.0 and pc.power != 0.0:
        u = pc.logpow / pc.power  # critical point in u = -ln s: -power + logpow/u = 0
        if u > 0:
            s = math.exp(-u)
            if pc.lo < s < pc.hi:
                vals.append(pc.value(s))
    return max(vals)


def limit_at(pc: Piece, s: float) -> float:
    if s == 0.0:
        if pc.power < 0 or (pc.power == 0 and pc.logpow > 0):
            return math.inf
        if pc.power == 0 and pc.logpow == 0:
            return pc.coef
        return 0.0
    if math.isinf(s):
        if pc.power > 0:
            return math.inf
        return pc.coef if pc.power == 0 else 0.0
    if s == 1.0 and pc.logpow != 0.0:
        return math.inf if pc.logpow < 0 else 0.0
    return pc.value(s)


def radial_profile(f: TestFunction) -> RadialProfile | NotRadial:
    if f.kind == "bumpsum":
        return NotRadial(tuple(tuple(c) for c in f.singular_centers))
    if f.kind == "zero":
        return RadialProfile((), 1.0, f.n)
    if f.kind == "indicator":
        return RadialProfile((Piece(0.0, f.R, 1.0),), 1.0, f.n)
    if f.kind == "tail_power":
        return RadialProfile((Piece(1.0, math.inf, 1.0, -f.g),), 1.0, f.n)
    return RadialProfile((Piece(0.0, f.R, f.coef, -f.g, -f.h),), f.p_root, f.n)


def eval_function(f: TestFunction, y) -> float:
    y = np.atleast_1d(np.asarray(y, dtype=float))
    for c in f.singular_centers:
        if f.kind != "bumpsum" and np.array_equal(y, c):
            raise SingularPoint(f"{f.kind} is singular at {tuple(c)}")
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(f.evaluate(y[None, :])[0])


# --------------------------------------------------------------------------
# parameter rules
# --------------------------------------------------------------------------

def default_truncation(r_min: float) -> int:
    """Bump count giving a bump of radius ``8^-k < r`` for every ``r >= r_min``."""
    return max(3, math.ceil(math.log(1.0 / r_min, 8.0)) + 2)


def log_square_radius(psi: ScaleFunction, cap: float = math.exp(-1.0)) -> float:
    """Largest ``delta <= cap`` with ``Psi(t) |ln t|^2`` nondecreasing on ``(0, delta]``."""
    _, a, b = psi.asymptotics("zero")
    e = b + 2.0
    if e <= 0:
        if a < 0:
            raise ValueError("Psi |ln|^2 is not nondecreasing near 0")
        delta = cap
    else:
        if a <= 0:
            raise ValueError("Psi |ln|^2 is not nondecreasing near 0")
        delta = min(cap, math.exp(-e / a))
    if psi.kind == "powerlog" and psi.b != 0.0:
        delta = min(delta, psi.t0)
    return delta


def bumps_disjoint(K: int) -> bool:
    """Exact check that the bump supports ``B(x_k, 8^-k)``, ``3 <= k <= K``, are disjoint."""
    for j in range(3, K + 1):
        for k in range(j + 1, K + 1):
            gap = Fraction(1, 2**j) - Fraction(1, 2**k)
            if not gap > Fraction(1, 8**j) + Fraction(1, 8**k):
                return False
    return True


def candidate_offsets(f: TestFunction, r: float) -> list[float]:
    """Distances from the origin worth testing as centers for a radial ``f``."""
    prof = radial_profile(f)
    out = {0.0}
    if isinstance(prof, RadialProfile):
        for b in prof.breakpoints:
            for x in (b - r, b, b + r, b - r / 2, b + r / 2):
                if x > 0:
                    out.add(x)
    return sorted(out)


def midpoints(points: Sequence[np.ndarray]) -> list[np.ndarray]:
    pts = sorted(points, key=lambda c: float(c[0]))
    return [0.5 * (a + b) for a, b in zip(pts, pts[1:])]
