import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import erfcx, shichi

from lowkgreen.brackets import (
    BracketKind,
    BracketSpec,
    QuadratureConfig,
    cumulative_bracket,
    eval_bracket,
)
from lowkgreen.errors import DivergentTail, InvalidSpec
from lowkgreen.potential import (
    EXPONENTIAL,
    Discontinuity,
    EndpointClass,
    EndpointKind,
    catalog,
    custom_model,
)

INF = math.inf
CFG = QuadratureConfig()
PLAIN, ALEFT, ARIGHT = BracketKind.PLAIN, BracketKind.ANGLE_LEFT, BracketKind.ANGLE_RIGHT


def plain(signs, lo, hi):
    return BracketSpec(PLAIN, signs, lo, hi)


class TestSpecValidation:
    def test_angle_left_needs_infinite_lower(self):
        with pytest.raises(InvalidSpec):
            BracketSpec(ALEFT, (-1,), 0.0, 1.0)

    def test_angle_slots_carry_minus(self):
        with pytest.raises(InvalidSpec):
            BracketSpec(ALEFT, (1,), -INF, 1.0)
        with pytest.raises(InvalidSpec):
            BracketSpec(ARIGHT, (-1, 1), 0.0, INF)

    def test_ordering(self):
        with pytest.raises(InvalidSpec):
            BracketSpec(PLAIN, (1,), 2.0, 1.0)

    def test_bad_signs(self):
        with pytest.raises(InvalidSpec):
            BracketSpec(PLAIN, (), 0.0, 1.0)
        with pytest.raises(InvalidSpec):
            BracketSpec(PLAIN, (2,), 0.0, 1.0)


class TestElementary:
    def test_unit_integrand(self):
        free = catalog("free")
        assert abs(eval_bracket(plain((1,), 0.25, 1.75), free, CFG) - 1.5) < 1e-13

    def test_simplex_volume(self):
        free = catalog("free")
        got = eval_bracket(plain((-1, -1), 0.0, 1.0), free, CFG)
        assert abs(got - 0.5) < 1e-13

    def test_gaussian(self):
        para = catalog("parabolic")
        got = eval_bracket(plain((-1,), -INF, INF), para, CFG)
        assert abs(got - math.sqrt(math.pi)) < 1e-13

    def test_flat_sinh_vanishes(self):
        free = catalog("free")
        spec = BracketSpec(ALEFT, (-1,), -INF, 0.7)
        assert abs(eval_bracket(spec, free, CFG)) < 1e-14

    def test_divergent_plain_toward_finite_limit(self):
        free = catalog("free")
        with pytest.raises(DivergentTail):
            eval_bracket(plain((-1,), -INF, 0.0), free, CFG)

    def test_doubly_infinite_depth_limit(self):
        para = catalog("parabolic")
        with pytest.raises(InvalidSpec):
            eval_bracket(plain((-1, -1), -INF, INF), para, CFG)


class TestAgainstIndependentQuadrature:
    def test_half_gaussian_cumulative(self):
        para = catalog("parabolic")
        got = cumulative_bracket(plain((-1,), -INF, 0.0), para, [-1.0, 0.0], CFG)
        want0 = math.sqrt(math.pi) / 2
        assert abs(got[1] - want0) < 1e-12
        wantm1 = integrate.quad(lambda z: np.exp(-z * z), -np.inf, -1.0)[0]
        assert abs(got[0] - wantm1) < 1e-12

    def test_three_deep_parabolic_vs_erfc_identity(self):
        # the 3-slot brackets of the parabolic model reduce to integrals of
        # exp(z^2) erfc(z)^2 = erfcx(z)^2 exp(-z^2)
        para = catalog("parabolic")
        ref_fn = lambda z: erfcx(z) ** 2 * np.exp(-z * z)
        for x in (0.0, 0.7, 1.2):
            left = eval_bracket(plain((1, -1, -1), x, INF), para, CFG)
            ref = np.pi / 8 * integrate.quad(ref_fn, x, np.inf, epsabs=1e-15)[0]
            assert abs(left / ref - 1) < 1e-12
            right = eval_bracket(plain((-1, -1, 1), -INF, x), para, CFG)
            ref = np.pi / 8 * integrate.quad(ref_fn, -x, np.inf, epsabs=1e-15)[0]
            assert abs(right / ref - 1) < 1e-12

    def test_angle_left_exponential_vs_shi(self):
        ex = catalog("exponential")
        for x in (-1.0, 0.5):
            got = eval_bracket(BracketSpec(ALEFT, (-1,), -INF, x), ex, CFG)
            want = -2.0 * shichi(np.exp(x))[0]
            assert abs(got / want - 1) < 1e-12

    def test_power_tail_logstep(self):
        ls = catalog("logstep", alpha=1.5)
        got = eval_bracket(plain((-1,), 1.5, INF), ls, CFG)
        want = 1.5 ** (-0.5) / 0.5
        assert abs(got / want - 1) < 1e-12


class TestInvariants:
    def test_splitting(self):
        lc = catalog("logcosh")
        a, b, c = -0.8, 0.4, 1.9
        whole = eval_bracket(plain((-1,), a, c), lc, CFG)
        parts = (eval_bracket(plain((-1,), a, b), lc, CFG)
                 + eval_bracket(plain((-1,), b, c), lc, CFG))
        assert abs(whole - parts) < 1e-12 * abs(whole)

    def test_positivity_and_monotonicity(self):
        para = catalog("parabolic")
        grid = np.linspace(-1.0, 2.0, 7)
        vals = cumulative_bracket(plain((-1,), -INF, 2.0), para, grid, CFG)
        assert np.all(vals > 0)
        assert np.all(np.diff(vals) > 0)

    def test_angle_sign(self):
        # V >= V1 everywhere makes sinh(V1 - V) <= 0
        ex = catalog("exponential")
        spec = BracketSpec(ALEFT, (-1,), -INF, 1.0)
        assert eval_bracket(spec, ex, CFG) < 0
        spec2 = BracketSpec(ALEFT, (-1, 1), -INF, 1.0)
        assert eval_bracket(spec2, ex, CFG) < 0

    def test_defining_identity_of_angle_brackets(self):
        # on a model with V == V1 exactly below -5 the angle bracket equals
        # the difference of plain brackets started at the flattening point
        v1 = np.exp(-5.0)

        def V(z):
            z = np.asarray(z, float)
            return np.exp(np.maximum(z, -5.0))

        def f(z):
            z = np.asarray(z, float)
            return np.where(z > -5.0, -0.5 * np.exp(z), 0.0)

        m = custom_model(
            "flattened", V, f,
            left=EndpointClass(EndpointKind.FINITE_LIMIT, EXPONENTIAL, v1),
            right=EndpointClass(EndpointKind.PLUS_INFINITY, EXPONENTIAL),
            discontinuities=(Discontinuity(-5.0, f(np.array([-4.999]))[0]),),
        )
        x = 0.8
        for tail in [(), (1,), (1, -1)]:
            signs = (-1,) + tail
            ang = eval_bracket(BracketSpec(ALEFT, signs, -INF, x), m, CFG)
            pm = eval_bracket(plain((-1,) + tail, -5.0, x), m, CFG)
            pp = eval_bracket(plain((1,) + tail, -5.0, x), m, CFG)
            want = pm - np.exp(-2 * v1) * pp
            assert abs(ang - want) < 1e-11 * max(1.0, abs(want))

    def test_outer_derivative_is_weight(self):
        # d/dz [+]_z^inf = -exp(V(z))
        sw = catalog("sqrtwell")
        grid = np.array([0.5, 0.5 + 1e-5])
        vals = cumulative_bracket(plain((1,), 0.5, INF), sw, grid, CFG)
        deriv = (vals[1] - vals[0]) / 1e-5
        want = -np.exp(sw.V(0.5 + 0.5e-5))
        assert abs(deriv / want - 1) < 1e-6

    def test_cumulative_matches_pointwise(self):
        lc = catalog("logcosh")
        grid = np.array([-1.0, 0.0, 1.5])
        vals = cumulative_bracket(plain((-1, -1, 1), -INF, 1.5), lc, grid, CFG)
        for z, v in zip(grid, vals):
            single = eval_bracket(plain((-1, -1, 1), -INF, z), lc, CFG)
            assert abs(v - single) < 1e-10 * max(1.0, abs(single))
