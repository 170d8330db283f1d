"""Scale functions Psi: (0, inf) -> (0, inf) and their structural conditions.

The power-log family is ``Psi(t) = C t^a |ln t|^b`` on ``(0, t0]``,
continued as ``Psi(t0) (t/t0)^a`` beyond ``t0`` so it stays positive and
doubling on the whole half-line.  Products and powers of members stay in
the family, which is what makes every integral downstream exact.

Conditions checked (``n`` is the ambient dimension):

* integrability  ``int_0^1 Psi(t)/t dt < inf``
* doubling       ``1/A1 <= Psi(s)/Psi(r) <= A1`` for ``1 <= s/r <= 2``
* almost-decay   ``Psi(r)/r^n <= A2 Psi(s)/s^n`` for ``s <= r``
* right doubling ``Psi(s)/Psi(r) <= A3`` for ``1 <= s/r <= 2``
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import quad
from .quad import Piece

DEFAULT_T0 = math.exp(-2.0)

HOLDS, FAILS, UNKNOWN = "holds", "fails", "unknown"


class NonPositiveArgument(ValueError):
    pass


class OutOfTableRange(ValueError):
    pass


@dataclass(frozen=True)
class ScaleFunction:
    kind: str
    a: float = 0.0
    b: float = 0.0
    t0: float = DEFAULT_T0
    scale_const: float = 1.0
    table: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("purepower", "powerlog", "tabulated"):
            raise ValueError(f"unknown scale kind {self.kind!r}")
        if self.scale_const <= 0:
            raise ValueError("scale_const must be positive")
        if self.kind == "powerlog" and not (0.0 < self.t0 < 1.0):
            raise ValueError("powerlog needs 0 < t0 < 1")
        if self.kind == "purepower" and self.b != 0.0:
            raise ValueError("purepower has no log factor")
        if self.kind == "tabulated":
            pts = tuple((float(t), float(v)) for t, v in self.table)
            if len(pts) < 2:
                raise ValueError("tabulated scale needs at least two points")
            ts = [t for t, _ in pts]
            if any(t <= 0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
                raise ValueError("table abscissae must be positive and strictly increasing")
            if any(v <= 0 for _, v in pts):
                raise ValueError("table values must be positive")
            object.__setattr__(self, "table", pts)

    # constructors -------------------------------------------------------

    @classmethod
    def pure_power(cls, a: float, scale_const: float = 1.0) -> "ScaleFunction":
        return cls("purepower", a=float(a), scale_const=float(scale_const))

    @classmethod
    def power_log(cls, a: float, b: float, t0: float = DEFAULT_T0,
                  scale_const: float = 1.0) -> "ScaleFunction":
        return cls("powerlog", a=float(a), b=float(b), t0=float(t0), scale_const=float(scale_const))

    @classmethod
    def tabulated(cls, points) -> "ScaleFunction":
        return cls("tabulated", table=tuple(map(tuple, points)))

    @classmethod
    def classical(cls, lam: float, p: float, n: int) -> "ScaleFunction":
        """``t^((lam - n)/p)``, the scale that turns the generalized Morrey norm classical."""
        return cls.pure_power((lam - n) / p)

    # evaluation ---------------------------------------------------------

    @property
    def is_power_log(self) -> bool:
        return self.kind != "tabulated"

    @property
    def log_power(self) -> float:
        return self.b if self.kind == "powerlog" else 0.0

    def pieces(self) -> list[Piece]:
        """Exact piecewise power-log representation on its domain."""
        c, a = self.scale_const, self.a
        if self.kind == "purepower":
            return [Piece(0.0, math.inf, c, a, 0.0)]
        if self.kind == "powerlog":
            if self.b == 0.0:
                return [Piece(0.0, math.inf, c, a, 0.0)]
            t0 = self.t0
            at_t0 = c * t0**a * abs(math.log(t0)) ** self.b
            return [Piece(0.0, t0, c, a, self.b), Piece(t0, math.inf, at_t0 * t0**-a, a, 0.0)]
        out = []
        for (t1, v1), (t2, v2) in zip(self.table, self.table[1:]):
            e = math.log(v2 / v1) / math.log(t2 / t1)
            out.append(Piece(t1, t2, v1 * t1**-e, e, 0.0))
        return out

    @property
    def domain(self) -> tuple[float, float]:
        if self.kind == "tabulated":
            return self.table[0][0], self.table[-1][0]
        return 0.0, math.inf

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise NonPositiveArgument("scale functions are defined for t > 0 only")
        lo, hi = self.domain
        if self.kind == "tabulated":
            if np.any((t < lo) | (t > hi)):
                raise OutOfTableRange(f"t outside table range [{lo}, {hi}]")
            lt = np.log([p[0] for p in self.table])
            lv = np.log([p[1] for p in self.table])
            out = np.exp(np.interp(np.log(t), lt, lv))
        else:
            c, a = self.scale_const, self.a
            out = c * t**a
            if self.kind == "powerlog" and self.b != 0.0:
                tt = np.minimum(t, self.t0)
                out = out * np.abs(np.log(tt)) ** self.b
        return float(out) if scalar else out

    def asymptotics(self, at: str) -> tuple[float, float, float]:
        """``(coef, power, logpow)`` with ``Psi ~ coef t^power |ln t|^logpow``."""
        pcs = self.pieces()
        if self.kind == "tabulated":
            raise OutOfTableRange("tabulated scales carry no asymptotics")
        pc = pcs[0] if at == "zero" else pcs[-1]
        return pc.coef, pc.power, pc.logpow

    # descriptors --------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "tabulated":
            return {"kind": "tabulated", "points": [list(p) for p in self.table]}
        d: dict[str, Any] = {"kind": self.kind, "a": self.a}
        if self.kind == "powerlog":
            d.update(b=self.b, t0=self.t0)
        d["scale_const"] = self.scale_const
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ScaleFunction":
        kind = str(d["kind"]).lower().replace("_", "").replace("-", "")
        if kind == "tabulated":
            return cls.tabulated(d["points"])
        if kind == "purepower":
            return cls.pure_power(d["a"], d.get("scale_const", 1.0))
        if kind == "powerlog":
            return cls.power_log(d["a"], d.get("b", 0.0), d.get("t0", DEFAULT_T0),
                                 d.get("scale_const", 1.0))
        raise ValueError(f"unknown scale kind {d['kind']!r}")


def eval_scale(psi: ScaleFunction, t: float) -> float:
    return psi(t)


# --------------------------------------------------------------------------
# conditions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionReport:
    cond_1_1: str
    cond_1_2: str
    cond_1_3: str
    cond_1_4: str
    A1: float | None = None
    A2: float | None = None
    A3: float | None = None
    method: str = "analytic"
    n: int = 1
    notes: tuple[str, ...] = field(default=())

    @property
    def integrable(self) -> bool:
        return self.cond_1_1 == HOLDS

    @property
    def doubling(self) -> bool:
        return self.cond_1_2 == HOLDS

    @property
    def almost_decreasing(self) -> bool:
        return self.cond_1_3 == HOLDS

    @property
    def right_doubling(self) -> bool:
        return self.cond_1_4 == HOLDS

    @property
    def kernel_nonincreasing(self) -> bool:
        """``Psi(t)/t^n`` is (exactly) nonincreasing."""
        return self.cond_1_3 == HOLDS and self.A2 == 1.0 and self.method == "analytic"

    def to_dict(self) -> dict[str, Any]:
        return {
            "integrability": self.cond_1_1, "doubling": self.cond_1_2,
            "almost_decreasing": self.cond_1_3, "right_doubling": self.cond_1_4,
            "A1": self.A1, "A2": self.A2, "A3": self.A3,
            "method": self.method, "n": self.n, "notes": list(self.notes),
        }


def _log_ratio_floor(t0: float) -> float:
    # smallest |ln s| / |ln r| over r <= s <= 2r under the t0 extension
    u0 = -math.log(t0)
    return u0 / (u0 + math.log(2.0))


def _doubling_constants(psi: ScaleFunction) -> tuple[float, float]:
    a, b = psi.a, psi.log_power
    rho = _log_ratio_floor(psi.t0) if b != 0.0 else 1.0
    a1 = 2.0 ** abs(a) * rho ** (-abs(b))
    a3 = max(1.0, 2.0**a) * max(1.0, rho**b)
    return a1, a3


def _almost_decreasing_constant(psi: ScaleFunction, n: int) -> float | None:
    """A2 for ``t^(a-n) |ln t|^b`` with the t0 extension, or None when it fails."""
    a, b = psi.a, psi.log_power
    slope = quad.snap(n - a)
    if slope < 0:
        return None
    if b == 0.0:
        return 1.0
    if slope == 0.0:
        return 1.0 if b > 0 else None
    if b > 0:
        return 1.0
    # phi(u) = slope*u + b ln u dips on [u0, u*] with u* = -b/slope
    u0 = -math.log(psi.t0)
    u_star = -b / slope
    if u_star <= u0:
        return 1.0
    drop = slope * (u0 - u_star) + b * math.log(u0 / u_star)
    return math.exp(drop)


def check_conditions(psi: ScaleFunction, n: int = 1, *, samples: int = 400,
                     max_constant: float = 1e6) -> ConditionReport:
    """Decide the four structural conditions for ``psi`` in dimension ``n``."""
    if psi.kind == "tabulated":
        return _sampled_conditions(psi, n, samples, max_constant)
    a, b = psi.a, psi.log_power
    a_s = quad.snap(a)
    c11 = HOLDS if (a_s > 0 or (a_s == 0 and b < -1)) else FAILS
    a1, a3 = _doubling_constants(psi)
    a2 = _almost_decreasing_constant(psi, n)
    c13 = HOLDS if a2 is not None else FAILS
    notes = []
    if psi.kind == "powerlog" and b != 0.0:
        notes.append(f"log factor frozen beyond t0={psi.t0:.6g} (extension convention)")
    return ConditionReport(c11, HOLDS, c13, HOLDS, A1=a1, A2=a2, A3=a3,
                           method="analytic", n=n, notes=tuple(notes))


def _sampled_conditions(psi, n, samples, max_constant):
    lo, hi = psi.domain
    if hi / lo < 2.0:
        return ConditionReport(UNKNOWN, UNKNOWN, UNKNOWN, UNKNOWN, method="sampled", n=n,
                               notes=("table spans less than one doubling",))
    t = np.geomspace(lo, hi / 2.0, samples)
    factors = np.linspace(1.0, 2.0, 33)
    ratios = psi(np.outer(t, factors)) / psi(t)[:, None]
    sup, inf = float(ratios.max()), float(ratios.min())
    a1 = max(sup, 1.0 / inf, 1.0)
    a3 = max(sup, 1.0)
    grid = np.geomspace(lo, hi, samples)
    g = np.log(psi(grid)) - n * np.log(grid)
    # largest rise of g from a smaller radius s to a larger radius r
    best_min = np.minimum.accumulate(g)
    a2 = float(np.exp(np.max(g - best_min)))
    verdict = lambda c: HOLDS if c <= max_constant else UNKNOWN  # noqa: E731
    return ConditionReport(
        UNKNOWN, verdict(a1), verdict(a2), verdict(a3), A1=a1, A2=a2, A3=a3,
        method="sampled", n=n,
        notes=(f"sampled on [{lo:.3g}, {hi:.3g}]; behaviour near 0 not determined",),
    )


# --------------------------------------------------------------------------
# integrals
# --------------------------------------------------------------------------

def _require_from_zero(pieces):
    if not pieces or pieces[0].lo > 0:
        raise OutOfTableRange("integral from 0 needs a scale defined down to 0")


def integral_scale_over_t(psi: ScaleFunction, r: float) -> float:
    """``int_0^r Psi(t)/t dt``; ``inf`` when divergent."""
    if r <= 0:
        raise NonPositiveArgument("r must be positive")
    pcs = psi.pieces()
    _require_from_zero(pcs)
    return quad.moment(pcs, -1.0, 0.0, r)


def integral_scale_between(psi: ScaleFunction, lo: float, hi: float, extra_power: float = -1.0) -> float:
    """``int_lo^hi Psi(t) t^extra_power dt``."""
    if hi <= lo:
        return 0.0
    dlo, dhi = psi.domain
    if lo < dlo or hi > dhi:
        raise OutOfTableRange(f"[{lo}, {hi}] leaves the scale's domain")
    return quad.moment(psi.pieces(), extra_power, lo, hi)


def product_pieces(psi1: ScaleFunction, p2: float, psi2: ScaleFunction) -> list[Piece]:
    return quad.multiply([pc.pow(p2) for pc in psi1.pieces()], psi2.pieces())


def product_integral(psi1: ScaleFunction, p2: float, psi2: ScaleFunction, r: float) -> float:
    """``int_0^r Psi1(t)^p2 Psi2(t) / t dt``; ``inf`` when divergent."""
    if r <= 0:
        raise NonPositiveArgument("r must be positive")
    pcs = product_pieces(psi1, p2, psi2)
    _require_from_zero(pcs)
    return quad.moment(pcs, -1.0, 0.0, r)


def dominated_near_zero(psi2: ScaleFunction, psi1: ScaleFunction) -> tuple[bool, float | None, float | None]:
    """Decide ``Psi2 <= c Psi1`` on some ``(0, delta)`` for power-log pairs.

    Returns ``(holds, c, delta)``.
    """
    c2, a2, b2 = psi2.asymptotics("zero")
    c1, a1, b1 = psi1.asymptotics("zero")
    da, db = quad.snap(a2 - a1), quad.snap(b2 - b1)
    if not (da > 0 or (da == 0 and db <= 0)):
        return False, None, None
    delta = min([1.0] + [p.t0 for p in (psi1, psi2) if p.kind == "powerlog" and p.b != 0.0])
    if delta >= 1.0:
        delta = math.exp(-1.0) if (b1 != 0.0 or b2 != 0.0) else 1.0
    # ratio in u = -ln t: (c2/c1) exp(-da u) u^db on u >= u_delta
    u_d = -math.log(delta)
    u_best = u_d
    if da > 0 and db > 0:
        u_best = max(u_d, db / da)
    ratio = (c2 / c1) * math.exp(-da * u_best) * (u_best**db if db != 0 else 1.0)
    return True, max(ratio, 0.0), delta
