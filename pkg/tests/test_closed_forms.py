import math

import mpmath
import numpy as np
import pytest
from scipy.optimize import brentq

from inhomlpp import (
    CornerPower,
    CornerSqrt,
    DomainError,
    classify_m2_limit,
    corner_D,
    corner_m2,
    corner_shape,
    crossing_residual,
    expansion_check,
    gamma,
    optimize_polyline,
    parabola_L,
    region_boundary_hyperbola,
    two_phase_constants,
    two_phase_shape,
    uniqueness_probe,
)
from inhomlpp.closed_forms import (
    ExpansionParams,
    axis_routes,
    corner_shape_numeric_check,
    crossing_density,
    crossing_roots,
    hyperbola_side_conditions,
    m2_quadratic,
    remainder_slope,
)
from inhomlpp.speed_field import OrderExponents

SQ2 = math.sqrt(2)
POWER_06 = CornerPower(c=0.5, b=1.2, k=3, r=3)


class TestTwoPhaseConstants:
    def test_reference_values(self):
        k = two_phase_constants(0.5, 1)
        assert k.A == pytest.approx(3 + 2 * SQ2, rel=1e-14)
        assert k.D == pytest.approx(4 * SQ2, rel=1e-14)
        assert k.K == pytest.approx(1.060660, abs=1e-6)
        assert k.a1_star == pytest.approx(1.030330, abs=1e-6)

    def test_no_shift(self):
        assert two_phase_constants(0.3, 0).D == 0

    def test_r_to_one(self):
        # A -> 1 and D -> 0, so the flat edge tends to 2x + 2y; K itself diverges
        k = two_phase_constants(1 - 1e-10, 1)
        assert k.A == pytest.approx(1, abs=1e-4) and abs(k.D) < 1e-3
        assert k.K > 1e4

    @pytest.mark.parametrize("r", [0, 1, 1.5, -0.2])
    def test_bad_r(self, r):
        with pytest.raises(DomainError):
            two_phase_constants(r, 1)


class TestParabola:
    def test_reference(self):
        assert parabola_L(0.5, 1, 3, 2.5) == pytest.approx(120.25, abs=0.01)

    def test_mpmath_oracle(self):
        mpmath.mp.dps = 40
        r, lam, x, y = mpmath.mpf("0.5"), mpmath.mpf(1), mpmath.mpf(3), mpmath.mpf("2.5")
        A = (1 + mpmath.sqrt(1 - r)) ** 2 / r
        D = 4 * lam * mpmath.sqrt(1 - r) / r
        L = (A * x - y / A) ** 2 - 2 * D * (A * x + y / A) + D**2
        assert parabola_L(0.5, 1, 3, 2.5) == pytest.approx(float(L), rel=1e-13)

    @pytest.mark.parametrize("r,lam", [(0.5, 1), (0.8, 0.5), (0.2, 3)])
    def test_tangent_at_entry_point(self, r, lam):
        a = two_phase_constants(r, lam).a1_star
        assert abs(parabola_L(r, lam, a, a - lam)) < 1e-8

    def test_no_shift_ray(self):
        A = two_phase_constants(0.5, 0).A
        assert parabola_L(0.5, 0, 1, A * A) == pytest.approx(0, abs=1e-10)
        assert parabola_L(0.5, 0, 2, 1) == pytest.approx((2 * A - 1 / A) ** 2)


class TestTwoPhaseShape:
    def test_trapezoid(self):
        ev = two_phase_shape(0.5, 1, 3, 2.5)
        A = 3 + 2 * SQ2
        assert ev.value == pytest.approx((1 + A) * 3 + (1 + 1 / A) * 2.5 - 4 * SQ2, rel=1e-13)
        assert ev.value == pytest.approx(17.75736, abs=1e-5)
        assert ev.branch == "trapezoid"

    def test_left_of_shift_is_straight(self):
        ev = two_phase_shape(0.5, 1, 0.5, 2)
        assert ev.value == pytest.approx(4.5, rel=1e-15) and ev.branch == "straight"

    def test_case2_continuous_at_entry(self):
        k = two_phase_constants(0.5, 1)
        a = k.a1_star
        on_line = two_phase_shape(0.5, 1, a, a - 1)
        assert on_line.value == pytest.approx(gamma(a, a - 1), abs=1e-8)
        case2 = 4 / 0.5 * a + 1 * (k.K + math.sqrt(k.K**2 - 1) - 2 / 0.5 * (1 + k.K))
        assert case2 == pytest.approx(gamma(a, a - 1), abs=1e-8)

    def test_case3_matches_grid(self):
        fast = two_phase_shape(0.5, 1, 3, 0.5)
        slow = two_phase_shape(0.5, 1, 3, 0.5, debug=True)
        assert fast.value == pytest.approx(slow.value, rel=1e-6)
        assert fast.value >= slow.value - 1e-12
        assert fast.branch == "two-segment"

    @pytest.mark.parametrize("r,lam", [(0.5, 1), (0.8, 0.5)])
    def test_continuity_across_parabola(self, r, lam):
        crossings = 0
        for y in (0.5, 1.5, 2.5, 4.0):
            xs = np.linspace(1e-6, y + lam, 2001)
            L = np.array([parabola_L(r, lam, x, y) for x in xs])
            for k in np.flatnonzero(np.sign(L[:-1]) != np.sign(L[1:])):
                x0 = brentq(lambda x: parabola_L(r, lam, x, y), xs[k], xs[k + 1], xtol=1e-14)
                lo = two_phase_shape(r, lam, x0 - 1e-6, y).value
                hi = two_phase_shape(r, lam, x0 + 1e-6, y).value
                assert abs(lo - hi) <= 1e-4
                crossings += 1
        assert crossings > 0

    def test_matches_optimizer(self, rng):
        for r, lam in ((0.5, 1), (0.8, 0.5)):
            for x, y in rng.uniform(0, 5, (8, 2)):
                cf = two_phase_shape(r, lam, x, y).value
                num = optimize_polyline(f"two-phase:r={r},lambda={lam}", (x, y)).value
                assert abs(cf - num) <= 1e-4 * cf


class TestCornerCrossing:
    def test_sqrt_straight_lines(self):
        f = CornerSqrt(r=2)
        assert corner_D(f, None, 0.25) == pytest.approx(0, abs=1e-14)
        assert corner_m2(f, None, 0.25) == pytest.approx(1)
        assert corner_m2(f, 5, 0.09) == pytest.approx(0.49 / 0.09, rel=1e-10)

    def test_sqrt_m2_is_m1_everywhere(self):
        f = CornerSqrt(r=2)
        a = np.geomspace(1e-6, 0.999, 50)
        np.testing.assert_allclose(corner_m2(f, None, a), f.f(a) / a, rtol=1e-9)

    def test_residual_zero_at_m2(self, rng):
        for f in (CornerSqrt(r=2), POWER_06, CornerPower(c=1, b=1, k=3, r=0.5)):
            for a in rng.uniform(0.01, 0.99, 20) * f.a0:
                assert abs(crossing_residual(f, None, a, corner_m2(f, None, a))) < 1e-9

    def test_residual_detects_wrong_slope(self):
        f = CornerSqrt(r=3)
        assert abs(crossing_residual(f, None, 0.25, 1.1 * corner_m2(f, None, 0.25))) > 1e-4

    def test_endpoints_rejected(self):
        with pytest.raises(DomainError):
            corner_m2(CornerSqrt(r=2), None, 0.0)
        with pytest.raises(DomainError):
            corner_D(CornerSqrt(r=2), None, 1.0)

    def test_unique_positive_root(self, rng):
        for f in (POWER_06, CornerPower(c=1, b=1, k=2, r=1.5)):
            for a in rng.uniform(0.01, 0.99, 10) * f.a0:
                one, b, c = m2_quadratic(f, None, a)
                roots = np.roots([one, b, c])
                pos = roots[roots.real > 0].real
                assert len(pos) == 1 and c < 0
                assert 1 / pos[0] ** 2 == pytest.approx(corner_m2(f, None, a), rel=1e-9)


class TestCornerShape:
    def test_sqrt_crossing(self):
        ev = corner_shape(CornerSqrt(r=2), 1, 1)
        assert ev.value == pytest.approx(2.5, rel=1e-12)
        assert ev.branch == "crossing-C"
        assert np.allclose(ev.crossing, (0.25, 0.25), atol=1e-10)

    def test_inside_fast_region(self):
        ev = corner_shape(CornerSqrt(r=2), 0.04, 0.04)
        assert ev.value == pytest.approx(0.16) and ev.branch == "straight"

    def test_dense_grid_oracle(self):
        f = CornerPower(c=0.5, b=2, k=3, r=3)
        ev = corner_shape(f, 0.05, 2)
        v, a = corner_shape_numeric_check(f, 0.05, 2)
        assert ev.value == pytest.approx(v, rel=1e-9)
        assert ev.value >= v - 1e-12
        # the dense grid puts the maximum strictly inside, not at a = 0
        assert a > 0 and ev.branch == "crossing-C"

    @pytest.mark.parametrize("target", [(0.3, 0.2), (0.1, 0.4), (0.5, 0.5), (0.2, 0.05)])
    def test_matches_optimizer(self, target):
        cf = corner_shape(POWER_06, *target)
        num = optimize_polyline(POWER_06, target)
        assert abs(cf.value - num.value) <= 1e-4 * cf.value
        v, _ = corner_shape_numeric_check(POWER_06, *target, points=200_000)
        assert cf.value >= v - 1e-12

    def test_roots_solve_crossing_equation(self):
        f = CornerPower(c=1, b=1, k=3, r=3)
        for s in crossing_roots(f, 1.5, 2.0):
            b = s.point[1]
            assert (2.0 - b) / (1.5 - s.a) == pytest.approx(s.m2, rel=1e-8)
            assert abs(s.residual) < 1e-9


class TestHyperbola:
    def test_symmetric_is_diagonal(self):
        f = CornerSqrt(r=3)
        for t in (1.5, 2, 5):
            assert region_boundary_hyperbola(f, None, t, t) == pytest.approx(0, abs=1e-12)
        h, v = axis_routes(f, None, 2, 2)
        assert h == pytest.approx(v, abs=1e-12)

    @pytest.mark.parametrize(
        "field", [CornerPower(c=0.5, b=1.2, k=3, r=3), CornerPower(c=1, b=1, k=2, r=2.5), CornerPower(c=0.5, b=2, k=3, r=1.5)]
    )
    def test_zero_set_equal_routes(self, field):
        checked = 0
        for x in np.linspace(field.a0, 5 * field.a0 + 2, 12):
            ys = np.linspace(field.f0, 5 * field.f0 + 4, 4001)
            H = np.array([region_boundary_hyperbola(field, None, x, y) for y in ys])
            for k in np.flatnonzero(np.sign(H[:-1]) != np.sign(H[1:])):
                y = brentq(lambda y: region_boundary_hyperbola(field, None, x, y), ys[k], ys[k + 1], xtol=1e-15)
                if hyperbola_side_conditions(field, None, x, y):
                    hv, vv = axis_routes(field, None, x, y)
                    assert hv == pytest.approx(vv, abs=1e-8)
                    checked += 1
        assert checked > 0

    def test_requires_r_above_one(self):
        with pytest.raises(DomainError):
            region_boundary_hyperbola(CornerSqrt(r=0.5), None, 2, 2)


class TestClassify:
    def test_origin_alpha_above_half(self):
        lim = classify_m2_limit(POWER_06, 3, "origin")
        assert lim.status == "finite" and lim.value == pytest.approx(0.25)

    def test_a0_mirror(self):
        lim = classify_m2_limit(CornerPower(c=1, b=1, k=3, r=3), None, "a0")
        assert lim.status == "finite" and lim.value == pytest.approx(4)

    def test_finite_slope_diverges(self):
        ex = OrderExponents(alpha=0.0, beta=1.0, c_alpha=2.0, eta_beta=1.0, f0=1.0, a0=1.0)
        assert classify_m2_limit(ex, 3).status == "infinite"

    def test_alpha_below_half(self):
        assert classify_m2_limit(CornerPower(c=0.5, b=2, k=3, r=3)).status == "infinite"

    def test_boundary_indeterminate(self):
        sqrt = CornerSqrt(r=2)
        # alpha = 1/2, c = 1 = sqrt(f0): every r is below the threshold
        assert classify_m2_limit(sqrt).status == "infinite"
        ex = OrderExponents(0.5, 1.0, 2.0, 1.0, 1.0, 1.0)
        assert classify_m2_limit(ex, 2.0).status == "indeterminate"
        assert classify_m2_limit(ex, 3.0).value == pytest.approx(1 / (3 - 1 - 3 / 2) ** 2)

    def test_bad_end(self):
        with pytest.raises(DomainError):
            classify_m2_limit(POWER_06, 3, "middle")

    @pytest.mark.parametrize(
        "field,end",
        [(POWER_06, "origin"), (CornerPower(c=1, b=1, k=3, r=3), "a0"), (CornerPower(c=0.5, b=2, k=3, r=3), "origin"),
         (CornerPower(c=1, b=1, k=2, r=0.5), "a0"), (CornerPower(c=1, b=0.5, k=3, r=1.5), "origin")],
    )
    def test_matches_numeric(self, field, end):
        lim = classify_m2_limit(field, None, end)
        # finite limits at the origin are approached like a^(b/k) or slower,
        # so probe far enough in to be in the asymptotic regime
        a = 1e-30 * field.a0 if end == "origin" else field.a0 * (1 - 1e-6)
        m2 = corner_m2(field, None, a)
        if lim.status == "finite":
            assert m2 == pytest.approx(lim.value, rel=0.02)
        elif lim.status == "infinite":
            assert m2 > 1e3
        elif lim.status == "zero":
            assert m2 < 1e-3


class TestExpansion:
    def test_leading_branch(self):
        p = ExpansionParams(f0=1, gamma_exp=0.75, c=0.5, r=2)
        res = expansion_check(p, 1e-8)
        assert res.leading == pytest.approx(1e-2 / math.sqrt(p.c_half))
        assert remainder_slope(p) >= 0.45

    def test_c_zero_ratio(self):
        p = dict(f0=1, gamma_exp=0.75, c=0.0, r=2)
        ratios = [expansion_check(p, a).lhs / expansion_check(p, a).leading for a in (1e-4, 1e-8, 1e-12)]
        assert abs(ratios[-1] - 1) < abs(ratios[0] - 1)
        assert ratios[-1] == pytest.approx(1, abs=1e-2)

    def test_bad_gamma(self):
        with pytest.raises(DomainError):
            ExpansionParams(f0=1, gamma_exp=0, c=1, r=2)


class TestUniqueness:
    def test_sqrt_contract(self):
        rep = uniqueness_probe(CornerSqrt(r=2), None, (1, 1), 0.5)
        assert rep.same_crossing and rep.a_star == pytest.approx(0.25)

    def test_identity(self):
        rep = uniqueness_probe(POWER_06, None, (0.3, 0.3), 1.0)
        assert rep.same_crossing and rep.new_target == pytest.approx(rep.target)

    def test_power_contract(self):
        rep = uniqueness_probe(POWER_06, None, (0.3, 0.3), 0.5)
        assert rep.same_crossing

    def test_extension_is_critical(self):
        rep = uniqueness_probe(POWER_06, None, (0.3, 0.3), 2.0)
        assert abs(rep.residual_at_a_star) < 1e-8

    def test_fast_region_rejected(self):
        with pytest.raises(DomainError):
            uniqueness_probe(CornerSqrt(r=2), None, (0.04, 0.04), 0.5)


def test_crossing_density_refines():
    gaps = [g for _, g in crossing_density(CornerSqrt(r=2), None, grid_sizes=(4, 8, 16))]
    assert gaps[0] >= gaps[1] >= gaps[2]
