"""Acceptance criteria, one test per criterion.

Each test prints ``PASS criterion N: ...`` or ``FAIL criterion N: ...``;
the lines are repeated in the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from stummel.catalog import TestFunction
from stummel.inclusion import (
    INCLUDES,
    TheoremId,
    check_theorem,
    fit_envelope,
    predict_and_check_morrey,
    verify_paper,
    verify_quantitative_bound,
)
from stummel.modulus import MEMBER, NON_MEMBER, ModulusProblem, classify, doubling_check, log_grid, modulus_curve
from stummel.quad import integrate_ball_mc
from stummel.scale import HOLDS, ScaleFunction, check_conditions, integral_scale_over_t
from stummel.spaces import (
    SpaceSpec,
    decreasing_rearrangement,
    layer_cake,
    lorentz_norm,
    morrey_norm,
    weak_lebesgue_norm,
    weak_morrey_norm,
)

pytestmark = pytest.mark.acceptance
power = ScaleFunction.pure_power


def verdict(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_1_log_critical_closed_form():
    f = TestFunction.log_critical(power(0.5), 1.0, 1, delta=math.exp(-4))
    ks = range(16, 8, -1)
    start = time.perf_counter()
    curve = modulus_curve(f, 1.0, power(0.5), [math.exp(-k) for k in ks])
    elapsed = time.perf_counter() - start
    err = max(rel(v, 2.0 / k) for k, v in zip(ks, curve.values))
    verdict(1, err <= 1e-6 and elapsed < 1.0, f"eta(e^-k) = 2/k for k=9..16, max rel err {err:.2e}, {elapsed:.3f}s")


def test_criterion_2_bump_separation():
    K = 14
    f = TestFunction.bump_sum(1, 0.5, K=K)
    grid = log_grid()
    start = time.perf_counter()
    curve = modulus_curve(f, 1.0, power(0.5), grid)
    s, b = classify(f, 1.0, 0.5, grid, curve=curve)
    elapsed = time.perf_counter() - start
    floor = min(v for r, v in zip(curve.r_grid, curve.values) if r >= 8.0**-K)
    ok = s.status == NON_MEMBER and b.status == MEMBER and floor >= 4 - 1e-9 and elapsed < 10
    verdict(2, ok, f"vanishing {s.status}, bounded {b.status}, min eta {floor:.12f}, {elapsed:.2f}s")


def test_criterion_3_proper_inclusions():
    grid = log_grid()
    f = TestFunction.log_critical(power(0.5), 1.0, 1)
    s_beta, _ = classify(f, 1.0, 0.5, grid)
    _, b_alpha = classify(f, 1.0, 0.25, grid)
    g = TestFunction.power(1, 0.3)
    s_p2, _ = classify(g, 1.0, 0.5, grid)
    _, b_p1 = classify(g, 2.0, 0.5, grid)
    ok = (s_beta.status == MEMBER and b_alpha.status == NON_MEMBER and b_alpha.divergent_at is not None
          and s_p2.status == MEMBER and b_p1.status == NON_MEMBER and b_p1.divergent_at is not None)
    verdict(3, ok, f"(a) {s_beta.status}/{b_alpha.status} divergent at r={b_alpha.divergent_at}; "
                   f"(b) {s_p2.status}/{b_p1.status} divergent at r={b_p1.divergent_at}")


def test_criterion_4_quantitative_bound():
    parts, ok = [], True
    for name, f in (("indicator", TestFunction.indicator(1, 1.0)), ("|y|^-1/4", TestFunction.power(1, 0.25, R=1.0))):
        rep = verify_quantitative_bound(f, 1.0, 1.0, power(-0.5), power(0.75), tolerance=0.05)
        ok &= rep.stable and math.isfinite(rep.max_ratio)
        parts.append(f"{name} max {rep.max_ratio:.6f} (2x grid {rep.refined_max_ratio:.6f})")
    verdict(4, ok, "; ".join(parts))


def test_criterion_5_envelope_round_trip():
    f = TestFunction.power(1, 0.25)
    fit = fit_envelope(modulus_curve(f, 1.0, power(0.5)))
    pred = predict_and_check_morrey(fit, f, 1.0, 1.0, 0.5)
    strong = morrey_norm(f, SpaceSpec.morrey(1.0, 1, lam=1 - 0.25)).value
    weak = weak_morrey_norm(f, SpaceSpec.weak_morrey(1.0, 1, lam=1 - 0.5 + fit.sigma)).value
    # grid-sup oracle: r^(-1/2) int_{x-r}^{x+r} |y|^(-1/2) dy over centers and radii
    x = np.linspace(-2.0, 2.0, 401)[:, None]
    r = np.geomspace(1e-4, 1e2, 300)[None, :]
    F = lambda y: 2 * np.sign(y) * np.sqrt(np.abs(y))  # noqa: E731
    oracle = float(np.max((F(x + r) - F(x - r)) / np.sqrt(r)))
    classical = morrey_norm(TestFunction.power(1, 0.5), SpaceSpec.morrey(1.0, 1, lam=0.5)).value
    ok = (abs(fit.sigma - 0.25) <= 1e-4 and math.isfinite(strong) and math.isfinite(weak)
          and pred.strong_finite and pred.weak_finite and rel(classical, oracle) <= 1e-6 and rel(classical, 4.0) <= 1e-6)
    verdict(5, ok, f"sigma {fit.sigma:.8f}, strong {strong:.6f}, weak {weak:.6f}, "
                   f"classical {classical:.10f} vs grid oracle {oracle:.10f}")


def test_criterion_6_weak_endpoint():
    f = TestFunction.power(1, 1.0)
    weak = weak_lebesgue_norm(f, 1.0)
    etas = modulus_curve(f, 1.0, power(0.5)).values
    report = verify_paper(only=["weak-morrey-endpoint-lambda-positive"])
    row = report.rows[0]
    positive = weak_morrey_norm(f, SpaceSpec.weak_morrey(1.0, 1, lam=0.5)).value
    ok = (rel(weak, 2.0) <= 1e-9 and all(math.isinf(v) for v in etas) and math.isinf(positive)
          and row.flagged and row.computed == {"weak_norm": "inf"})
    verdict(6, ok, f"wL^1 norm {weak!r}, eta divergent at all {len(etas)} radii, "
                   f"lambda=0.5 norm {positive}, flagged={row.flagged}")


def _empirical_error(f, box, samples=1_000_000, seed=2024):
    rng = np.random.default_rng(seed)
    y = -box + (np.arange(samples) + rng.random(samples)) * (2 * box / samples)
    with np.errstate(divide="ignore"):
        vals = np.sort(f.evaluate(y[:, None]))[::-1]
    t = np.geomspace(0.01, 10.0, 200)
    emp = vals[np.minimum((t / (2 * box) * samples).astype(int), samples - 1)]
    exact = decreasing_rearrangement(f)(t)
    pos = exact > 0
    if np.any(emp[~pos] != 0):
        return math.inf
    return float(np.max(np.abs(emp[pos] / exact[pos] - 1.0))) if pos.any() else 0.0


def test_criterion_7_rearrangement_and_lorentz():
    cake_err = 0.0
    for f in (TestFunction.indicator(1), TestFunction.power(1, 0.5, R=1.0), TestFunction.bump_sum(1, 0.5, K=4)):
        lc = layer_cake(f, 1.0)
        cake_err = max(cake_err, rel(lc["distribution"], lc["direct"]), rel(lc["rearrangement"], lc["direct"]))
    l12 = lorentz_norm(TestFunction.indicator(1), 2.0, 1.0)
    linf = lorentz_norm(TestFunction.power(1, 0.5), 2.0, math.inf)
    mc = max(_empirical_error(f, 10.0) for f in (TestFunction.indicator(1), TestFunction.power(1, 0.5),
                                                 TestFunction.bump_sum(1, 0.5, K=4)))
    ok = cake_err <= 1e-8 and rel(l12, 2 * math.sqrt(2)) <= 1e-8 and rel(linf, math.sqrt(2)) <= 1e-8 and mc <= 0.02
    verdict(7, ok, f"layer cake rel {cake_err:.1e}, L^1_2 {l12:.12f}, L^inf_2 {linf:.12f}, f* MC sup err {mc:.2e}")


def test_criterion_8_lorentz_endpoint_sweep():
    concl = [check_theorem(TheoremId.LORENTZ_P_IN_BOUNDED_CLASS, {"n": 1, "p": 1.0, "alpha": 0.5, "kappa": k}).conclusion
             for k in (2.0, 2.5, 3.0)]
    f = TestFunction.tail_power(1, 0.5)
    above, edge = lorentz_norm(f, 3.0, 1.0), lorentz_norm(f, 2.0, 1.0)
    ok = concl == [INCLUDES] * 3 and math.isfinite(above) and math.isinf(edge)
    verdict(8, ok, f"conclusions {concl}, L^1_3 {above:.6f}, L^1_2 {edge}")


def _monotone_ok():
    cases = [(TestFunction.power(1, 0.25), 1.0, power(0.5)), (TestFunction.tail_power(1, 2.0), 1.0, power(0.5)),
             (TestFunction.bump_sum(1, 0.5, K=8), 1.0, power(0.5)), (TestFunction.indicator(2), 2.0, power(1.5))]
    for f, p, psi in cases:
        v = modulus_curve(f, p, psi, log_grid(1e-9, 1e2, 20)).values
        if not all(b >= a * (1 - 1e-9) for a, b in zip(v, v[1:])):
            return False
    return True


def _doubling_ok():
    cases = [(TestFunction.log_critical(power(0.5), 1.0, 1), power(0.5)), (TestFunction.tail_power(1, 2.0), power(0.5)),
             (TestFunction.bump_sum(1, 0.5, K=10), power(0.5)), (TestFunction.power(2, 0.5), power(1.0))]
    return all(1.0 <= doubling_check(modulus_curve(f, 1.0, psi, log_grid(1e-8, 1e2, 16))) < 16 for f, psi in cases)


def _origin_ok():
    for f, alpha in ((TestFunction.power(1, 0.3), 0.5), (TestFunction.indicator(2, 0.5), 1.0),
                     (TestFunction.radial_powerlog(3, 1.0, 2.0, math.exp(-3)), 2.0)):
        prob = ModulusProblem(f, 1.0, power(alpha))
        at_origin = prob.integral_at(np.zeros(f.n), 0.4)
        rng = np.random.default_rng(21)
        for i in range(50):
            x = rng.uniform(-0.6, 0.6, f.n)
            est = integrate_ball_mc(prob.integrand(x), x, 0.4, 4096, seed=i)
            if est.value > at_origin + 4 * est.std_error + 1e-12:
                return False
    return True


def _holder_ok():
    for f, psi in ((TestFunction.power(1, 0.2), power(0.5)), (TestFunction.bump_sum(1, 0.25, K=8), power(0.5))):
        big, small = ModulusProblem(f, 2.0, psi), ModulusProblem(f, 1.0, psi)

        def max_ratio(points):
            return max(small.eta(r) / (big.eta(r) * integral_scale_over_t(psi, r) ** 0.5)
                       for r in log_grid(1e-8, 10.0, points))
        coarse, fine = max_ratio(10), max_ratio(19)
        if not (fine <= 2**0.5 * (1 + 1e-9) and abs(fine - coarse) <= 0.05 * fine):
            return False
    return True


def _doubling_certificate_ok():
    rng = np.random.default_rng(5)
    for a, b, t0 in ((0.5, 0.0, 0.1), (-1.0, 2.0, 0.1), (2.0, -3.0, 0.05), (0.0, -2.0, math.exp(-2))):
        psi = ScaleFunction.power_log(a, b, t0)
        rep = check_conditions(psi)
        r = np.exp(rng.uniform(math.log(1e-12), math.log(10.0), 10_000))
        ratio = psi(r * rng.uniform(1.0, 2.0, 10_000)) / psi(r)
        if not (rep.cond_1_2 == HOLDS and ratio.max() <= rep.A1 * (1 + 1e-12) and ratio.min() >= (1 - 1e-12) / rep.A1):
            return False
    return True


def test_criterion_9_property_suites():
    results = {"monotone": _monotone_ok(), "doubling": _doubling_ok(), "origin-sup MC": _origin_ok(),
               "Holder ratio": _holder_ok(), "doubling certificate": _doubling_certificate_ok()}
    verdict(9, all(results.values()), ", ".join(f"{k} {'ok' if v else 'FAILED'}" for k, v in results.items()))
