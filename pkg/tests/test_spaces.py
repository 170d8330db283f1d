import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stummel.catalog import TestFunction, unit_ball_volume
from stummel.quad import integrate_ball_mc
from stummel.scale import ScaleFunction
from stummel.spaces import (
    SpaceSpec,
    decreasing_rearrangement,
    distribution_function,
    layer_cake,
    lebesgue_norm,
    lorentz_norm,
    morrey_norm,
    norm,
    weak_lebesgue_norm,
    weak_morrey_norm,
)

INF = math.inf


class TestDistribution:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_indicator(self, n):
        f = TestFunction.indicator(n, 1.5)
        assert distribution_function(f, 0.5) == pytest.approx(unit_ball_volume(n) * 1.5**n, rel=1e-14)
        assert distribution_function(f, 1.5) == 0.0

    def test_power(self):
        assert distribution_function(TestFunction.power(1, 0.5), 2.0) == pytest.approx(0.5, rel=1e-14)

    def test_tail(self):
        assert distribution_function(TestFunction.tail_power(1, 2.0), 0.25) == pytest.approx(2.0, rel=1e-14)

    def test_bumps(self):
        f = TestFunction.bump_sum(1, 0.5, K=4)
        assert distribution_function(f, 30.0) == pytest.approx(2 * 8.0**-4, rel=1e-14)
        assert distribution_function(f, 10.0) == pytest.approx(2 * 8.0**-4 + 2 * 8.0**-3, rel=1e-14)

    def test_tiny_level_stays_finite(self):
        f = TestFunction.tail_power(2, 1.5)
        assert distribution_function(f, 1e-250, 1.0) == pytest.approx(math.pi * 1e-250 ** (1 - 4 / 3), rel=1e-9)

    def test_measure_oracle(self):
        rng = np.random.default_rng(12)
        y = rng.uniform(-1, 1, 2_000_000)
        frac = np.mean(np.abs(y) ** -0.5 > 2.0)
        assert frac * 2 == pytest.approx(distribution_function(TestFunction.power(1, 0.5), 2.0), rel=5e-3)


class TestRearrangement:
    def test_indicator(self):
        rp = decreasing_rearrangement(TestFunction.indicator(1, 1.0))
        assert rp(np.array([0.0, 1.99, 2.0, 5.0])).tolist() == [1.0, 1.0, 0.0, 0.0]
        assert rp.total_support == pytest.approx(2.0)

    @pytest.mark.parametrize("n,gamma", [(1, 0.5), (2, 0.7), (3, 1.2)])
    def test_power(self, n, gamma):
        rp = decreasing_rearrangement(TestFunction.power(n, gamma))
        t = np.geomspace(1e-6, 1e3, 50)
        np.testing.assert_allclose(rp(t), (t / unit_ball_volume(n)) ** (-gamma / n), rtol=1e-13)

    def test_bump_steps(self):
        rp = decreasing_rearrangement(TestFunction.bump_sum(1, 0.5, K=4))
        w4, w3 = 2 * 8.0**-4, 2 * 8.0**-3
        assert rp.steps[0] == pytest.approx((0.0, w4, 64.0))
        assert rp.steps[1] == pytest.approx((w4, w4 + w3, 8.0**1.5))
        assert float(rp(np.array(w4 + w3))) == 0.0

    @pytest.mark.parametrize("f", [TestFunction.bump_sum(1, 0.5, K=6), TestFunction.tail_power(2, 1.0),
                                   TestFunction.radial_powerlog(1, 0.5, 2.0, 0.01), TestFunction.indicator(3)],
                             ids=lambda f: f.kind)
    def test_nonincreasing_and_right_continuous(self, f):
        rp = decreasing_rearrangement(f)
        t = np.geomspace(1e-9, 1e3, 2000)
        vals = rp(t)
        assert np.all(np.diff(vals) <= 1e-15 * vals[:-1])
        for b in rp.breakpoints:
            if b > 0:
                assert float(rp(np.array(b))) == pytest.approx(float(rp(np.array(b * (1 + 1e-12)))), rel=1e-9)
        if math.isfinite(rp.total_support):
            assert float(rp(np.array(rp.total_support))) == 0.0

    def test_refuses_nonmonotone_radial(self):
        with pytest.raises(ValueError):
            decreasing_rearrangement(TestFunction.tail_power(1, 0.0))

    @pytest.mark.parametrize("f,box", [(TestFunction.power(1, 0.5), 10.0), (TestFunction.tail_power(1, 2.0), 12.0)],
                             ids=["power", "tail"])
    def test_empirical_cdf(self, f, box):
        # one jittered uniform sample per equal cell of the box
        n = 1_000_000
        rng = np.random.default_rng(2024)
        y = -box + (np.arange(n) + rng.random(n)) * (2 * box / n)
        with np.errstate(divide="ignore"):
            vals = np.sort(f.evaluate(y[:, None]))[::-1]
        t = np.geomspace(0.01, 10.0, 200)
        emp = vals[np.minimum((t / (2 * box) * n).astype(int), n - 1)]
        exact = decreasing_rearrangement(f)(t)
        assert np.max(np.abs(emp / exact - 1.0)) < 0.02


class TestLorentz:
    def test_examples(self):
        assert lorentz_norm(TestFunction.indicator(1, 1.0), 2.0, 1.0) == pytest.approx(2 * math.sqrt(2), rel=1e-12)
        assert lorentz_norm(TestFunction.power(1, 0.5), 2.0, INF) == pytest.approx(math.sqrt(2), rel=1e-12)
        assert lorentz_norm(TestFunction.zero(1), 2.0, 1.0) == 0.0

    def test_tail_remark(self):
        f = TestFunction.tail_power(1, 0.5)
        assert math.isfinite(lorentz_norm(f, 3.0, 1.0))
        assert math.isinf(lorentz_norm(f, 2.0, 1.0))

    @pytest.mark.parametrize("f,kappa,p", [
        (TestFunction.radial_powerlog(2, 0.5, 1.5, 0.04), 3.0, 2.0),
        (TestFunction.tail_power(2, 1.5), 1.5, 1.0),
        (TestFunction.bump_sum(1, 0.5, K=6), 2.5, 3.0),
        (TestFunction.power(3, 1.0, R=1.0), 2.0, 1.5),
    ], ids=lambda v: getattr(v, "kind", str(v)))
    def test_against_mpmath(self, f, kappa, p):
        # t = e^u turns dt/t into du and removes the endpoint singularity
        rp = decreasing_rearrangement(f)
        mpmath.mp.dps = 20
        pts = [-mpmath.inf] + [mpmath.log(b) for b in sorted(rp.breakpoints) if b > 0]
        top = rp.total_support
        pts.append(mpmath.log(top) if math.isfinite(top) else mpmath.inf)

        def g(u):
            t = max(float(mpmath.exp(u)), 1e-300)
            return (mpmath.exp(u / kappa) * float(rp(np.array(t)))) ** p
        want = float(mpmath.quad(g, pts)) ** (1 / p)
        assert lorentz_norm(f, kappa, p) == pytest.approx(want, rel=1e-9)

    def test_weak_lebesgue_identity(self):
        f = TestFunction.power(2, 1.0)
        assert lorentz_norm(f, 2.0, INF) == pytest.approx(weak_lebesgue_norm(f, 2.0), rel=1e-9)

    @pytest.mark.parametrize("f", [TestFunction.indicator(1), TestFunction.power(1, 0.3, R=2.0), TestFunction.tail_power(1, 0.7),
                                   TestFunction.bump_sum(1, 0.5, K=5), TestFunction.power(2, 0.8), TestFunction.tail_power(2, 2.5)],
                             ids=lambda f: f"{f.kind}-n{f.n}")
    def test_nesting(self, f):
        for kappa in (1.0, 1.5, 2.0, 3.0, 5.0):
            ps = [1.0, 1.5, 2.0, 4.0, INF]
            for p2, p1 in ((a, b) for a in ps for b in ps if a <= b):
                if math.isfinite(lorentz_norm(f, kappa, p2)):
                    assert math.isfinite(lorentz_norm(f, kappa, p1)), (kappa, p2, p1)


class TestLayerCake:
    @pytest.mark.parametrize("f,p", [
        (TestFunction.indicator(1), 1.0), (TestFunction.power(1, 0.5, R=1.0), 1.0),
        (TestFunction.bump_sum(1, 0.5, K=4), 1.0), (TestFunction.tail_power(2, 1.5), 2.0),
        (TestFunction.radial_powerlog(3, 1.0, 2.0, 0.1), 1.5), (TestFunction.bump_sum(2, 1.0, K=4), 1.0),
    ], ids=lambda v: getattr(v, "kind", str(v)))
    def test_three_routes_agree(self, f, p):
        lc = layer_cake(f, p)
        assert math.isfinite(lc["direct"])
        assert lc["distribution"] == pytest.approx(lc["direct"], rel=1e-8)
        assert lc["rearrangement"] == pytest.approx(lc["direct"], rel=1e-8)

    def test_untruncated_power_is_infinite_on_every_route(self):
        lc = layer_cake(TestFunction.power(1, 0.5), 1.0)
        assert all(math.isinf(v) for v in lc.values())

    def test_lebesgue_norm(self):
        assert lebesgue_norm(TestFunction.power(1, 0.5, R=1.0), 1.0) == pytest.approx(4.0, rel=1e-12)


def _classical(p, n, lam):
    return SpaceSpec.morrey(p, n, lam=lam)


class TestMorrey:
    def test_indicator_lebesgue(self):
        assert morrey_norm(TestFunction.indicator(1), _classical(1, 1, 0.0)).value == pytest.approx(2.0, rel=1e-12)

    def test_power_classical(self):
        rep = morrey_norm(TestFunction.power(1, 0.5), _classical(1, 1, 0.5))
        assert rep.value == pytest.approx(4.0, rel=1e-12)

    def test_power_against_center_grid(self):
        # r^(-1/2) int_{x-r}^{x+r} |y|^(-1/2) dy over a grid of centers and radii
        x = np.linspace(-3, 3, 601)[:, None]
        r = np.geomspace(1e-4, 1e2, 400)[None, :]
        F = lambda y: 2 * np.sign(y) * np.sqrt(np.abs(y))  # noqa: E731
        grid_sup = np.max((F(x + r) - F(x - r)) / np.sqrt(r))
        assert morrey_norm(TestFunction.power(1, 0.5), _classical(1, 1, 0.5)).value == pytest.approx(grid_sup, rel=1e-6)

    def test_log_critical_is_not_morrey(self):
        f = TestFunction.log_critical(ScaleFunction.pure_power(0.5), 1.0, 1, delta=math.exp(-4))
        rep = morrey_norm(f, SpaceSpec.morrey(1, 1, scale=ScaleFunction.pure_power(-0.25)))
        assert math.isinf(rep.value)

    def test_nonintegrable_is_infinite(self):
        assert math.isinf(morrey_norm(TestFunction.power(2, 1.0), _classical(2, 2, 1.0)).value)

    def test_tail_against_brute_force(self):
        f = TestFunction.tail_power(1, 2.0)
        lam = 0.5
        x = np.linspace(0.0, 4.0, 801)[:, None]
        r = np.geomspace(1e-3, 1e3, 600)[None, :]

        def side(a, b):  # int of y^-2 over [a, b] cap (1, inf)
            lo = np.maximum(a, 1.0)
            return np.where(b > lo, 1 / lo - 1 / np.where(b > lo, b, 1.0), 0.0)
        mass = side(x - r, x + r) + side(-x - r, -x + r)
        brute = np.max(mass * r**-lam)
        got = morrey_norm(f, _classical(1, 1, lam)).value
        assert got >= brute * (1 - 1e-9)
        assert got == pytest.approx(brute, rel=1e-4)

    def test_two_dimensional_lower_bound(self):
        f = TestFunction.tail_power(2, 1.5)
        spec = _classical(1.0, 2, 1.0)
        got = morrey_norm(f, spec).value
        rng = np.random.default_rng(1)
        for i in range(10):
            xc = rng.uniform(-2, 2, 2)
            rr = 10 ** rng.uniform(-1, 1)
            est = integrate_ball_mc(lambda y: f.evaluate(y), xc, rr, 50_000, seed=i)
            assert est.value / rr - 4 * est.std_error / rr <= got

    @settings(max_examples=25)
    @given(gamma=st.floats(0.05, 0.95), lam=st.floats(0.0, 1.0), p=st.sampled_from([1.0, 2.0]),
           kind=st.sampled_from(["power", "indicator", "tail", "bumps"]))
    def test_classical_equals_generalized(self, gamma, lam, p, kind):
        f = {"power": TestFunction.power(1, gamma / p, R=1.0), "indicator": TestFunction.indicator(1, 2.0),
             "tail": TestFunction.tail_power(1, 1 + gamma), "bumps": TestFunction.bump_sum(1, 0.5, K=4)}[kind]
        classical = morrey_norm(f, SpaceSpec.morrey(p, 1, lam=lam)).value
        gen = morrey_norm(f, SpaceSpec.morrey(p, 1, scale=ScaleFunction.classical(lam, p, 1))).value
        factor = unit_ball_volume(1) ** (1 / p)
        if math.isinf(classical) or math.isinf(gen):
            assert math.isinf(classical) and math.isinf(gen)
        else:
            assert classical == pytest.approx(factor * gen, rel=1e-10)


class TestWeakMorrey:
    def test_endpoint_power(self):
        assert weak_morrey_norm(TestFunction.power(1, 1.0), SpaceSpec.weak_morrey(1, 1, lam=0.0)).value == pytest.approx(2.0, rel=1e-9)

    def test_indicator(self):
        assert weak_morrey_norm(TestFunction.indicator(1), SpaceSpec.weak_morrey(1, 1, lam=0.0)).value == pytest.approx(2.0, rel=1e-12)

    def test_positive_index_blows_up(self):
        assert math.isinf(weak_morrey_norm(TestFunction.power(1, 1.0), SpaceSpec.weak_morrey(1, 1, lam=0.5)).value)

    @pytest.mark.parametrize("f", [TestFunction.power(1, 0.4), TestFunction.indicator(1, 0.5), TestFunction.tail_power(1, 1.5),
                                   TestFunction.bump_sum(1, 0.5, K=5), TestFunction.power(2, 0.6, R=1.0)],
                             ids=lambda f: f"{f.kind}-n{f.n}")
    def test_weak_below_strong(self, f):
        for p in (1.0, 2.0):
            for lam in np.linspace(0.0, f.n, 5):
                strong = morrey_norm(f, SpaceSpec.morrey(p, f.n, lam=float(lam))).value
                if math.isfinite(strong):
                    weak = weak_morrey_norm(f, SpaceSpec.weak_morrey(p, f.n, lam=float(lam))).value
                    assert weak <= strong * (1 + 1e-9), (p, lam)


class TestSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            SpaceSpec.morrey(1.0, 1, lam=1.5)
        with pytest.raises(ValueError):
            SpaceSpec.morrey(0.5, 1, lam=0.5)
        with pytest.raises(ValueError):
            SpaceSpec("morrey", 1.0, 1)
        with pytest.raises(ValueError):
            SpaceSpec.lorentz(0.0, 1.0)

    @pytest.mark.parametrize("spec", [SpaceSpec.morrey(2.0, 2, lam=1.0), SpaceSpec.lorentz(2.0, INF, 1),
                                      SpaceSpec.weak_morrey(1.0, 1, scale=ScaleFunction.power_log(-0.5, 1.0))])
    def test_round_trip(self, spec):
        assert SpaceSpec.from_dict(spec.to_dict()) == spec

    def test_dispatch(self):
        f = TestFunction.indicator(1)
        assert norm(f, SpaceSpec("lebesgue", 1.0, 1)).value == pytest.approx(2.0)
        assert norm(f, SpaceSpec("weak_lebesgue", 1.0, 1)).value == pytest.approx(2.0)
        assert norm(f, SpaceSpec.lorentz(2.0, 1.0, 1)).value == pytest.approx(2 * math.sqrt(2))

    def test_report_encoding(self):
        rep = morrey_norm(TestFunction.power(1, 1.0), SpaceSpec.morrey(1, 1, lam=0.5))
        assert rep.to_dict()["value"] == "infinite"
