"""Property-based checks of the structural invariants."""

import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from shiftpress.caratheodory import HausdorffProblem, PressureProblem, hausdorff_value
from shiftpress.errors import InsufficientDepth
from shiftpress.cover import CylinderTree, enumerate_cover_costs, optimal_cover_dp
from shiftpress.lyapunov import birkhoff, tempered_certificate
from shiftpress.spectra import legendre_entropy, spectrum_table
from shiftpress.symbolic import (
    Geometric,
    SequencePoint,
    ShiftSystem,
    WeightedProduct,
    ball_to_cylinder,
    bowen_ball_to_cylinder,
    distance,
)
from shiftpress.targets import FrequencyWindow, Full, Subshift, UnionOf
from shiftpress.thermo import bowen_root, closed_form_curve

SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
SLOW = settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])

thetas = st.floats(1.2, 5.0, allow_nan=False)


@st.composite
def systems(draw, k=None):
    k = draw(st.integers(2, 3)) if k is None else k
    if draw(st.booleans()):
        return ShiftSystem(k, Geometric(draw(thetas)))
    return ShiftSystem(k, WeightedProduct(tuple(draw(thetas) for _ in range(k)), draw(st.booleans())))


@st.composite
def points(draw, k):
    sym = st.integers(1, k)
    return SequencePoint(draw(st.lists(sym, max_size=4)), draw(st.lists(sym, min_size=1, max_size=4)))


@st.composite
def system_and_points(draw, n=1):
    sys = draw(systems())
    return (sys, *[draw(points(sys.k)) for _ in range(n)])


radii = st.floats(1e-3, 1.2, allow_nan=False)


class TestMetric:
    @SETTINGS
    @given(system_and_points(3))
    def test_ultrametric(self, data):
        sys, x, y, z = data
        assert distance(sys, x, z) <= max(distance(sys, x, y), distance(sys, y, z))

    @SETTINGS
    @given(system_and_points(2))
    def test_symmetric_and_zero_iff_equal(self, data):
        sys, x, y = data
        assert distance(sys, x, y) == distance(sys, y, x)
        assert (distance(sys, x, y) == 0) == (x == y)

    @SETTINGS
    @given(system_and_points(1), radii, radii)
    def test_ball_nesting(self, data, r1, r2):
        sys, x = data
        r1, r2 = sorted((r1, r2))
        assert ball_to_cylinder(sys, x, r1) >= ball_to_cylinder(sys, x, r2)

    @SETTINGS
    @given(system_and_points(1), radii)
    def test_ball_is_cylinder(self, data, r):
        # y is in the ball exactly when it shares the first m symbols
        sys, x = data
        m = ball_to_cylinder(sys, x, r)
        for j in range(max(m, 1) + 2):
            for s in range(1, sys.k + 1):
                y = SequencePoint(x.prefix(j) + (s,), (1,))
                assert (distance(sys, x, y) < r) == (common(x, y) >= m)

    @SETTINGS
    @given(system_and_points(1), st.integers(0, 6), st.integers(0, 6), radii, radii)
    def test_bowen_monotone(self, data, n1, n2, d1, d2):
        sys, x = data
        n1, n2 = sorted((n1, n2))
        d1, d2 = sorted((d1, d2))
        assert bowen_ball_to_cylinder(sys, x, n1, d1) <= bowen_ball_to_cylinder(sys, x, n2, d1)
        assert bowen_ball_to_cylinder(sys, x, n1, d1) >= bowen_ball_to_cylinder(sys, x, n1, d2)

    @SETTINGS
    @given(system_and_points(1), radii)
    def test_bowen_order_zero(self, data, r):
        sys, x = data
        assert bowen_ball_to_cylinder(sys, x, 0, r) == ball_to_cylinder(sys, x, r)

    @SETTINGS
    @given(st.floats(1.2, 5.0), st.integers(2, 3), st.data(), st.integers(0, 8), st.floats(1e-3, 1.0))
    def test_geometric_shift_invariance(self, theta, k, data, n, delta):
        sys = ShiftSystem(k, Geometric(theta))
        x = data.draw(points(k))
        assert bowen_ball_to_cylinder(sys, x, n, delta) == n + ball_to_cylinder(sys, x, delta)


def common(x, y):
    n = 0
    while n < 64 and x.symbol(n) == y.symbol(n):
        n += 1
    return n


class TestOrbits:
    @SETTINGS
    @given(system_and_points(1), st.integers(2, 30), st.data())
    def test_cocycle(self, data, n, d):
        sys, x = data
        k = d.draw(st.integers(1, n - 1))
        lhs = n * birkhoff(sys, x, n)
        rhs = k * birkhoff(sys, x, k) + (n - k) * birkhoff(sys, x.shift(k), n - k)
        assert lhs == pytest.approx(rhs, abs=1e-12)

    @SETTINGS
    @given(st.lists(st.floats(-2, 2), min_size=12, max_size=12), st.floats(0, 1), st.floats(0, 1), st.integers(1, 11))
    def test_tempered_monotone(self, w, e1, e2, D):
        e1, e2 = sorted((e1, e2))
        assert tempered_certificate(None, w, e1, D).infimum <= tempered_certificate(None, w, e2, D).infimum + 1e-12
        assert tempered_certificate(None, w, e1, D + 1).infimum <= tempered_certificate(None, w, e1, D).infimum


class TestCovers:
    @SETTINGS
    @given(st.integers(2, 3), st.integers(0, 3), st.data())
    def test_dp_equals_exhaustive(self, k, depth, data):
        words = [w for d in range(depth + 1) for w in itertools.product(range(1, k + 1), repeat=d)]
        ws = data.draw(st.lists(st.floats(1e-3, 10.0), min_size=len(words), max_size=len(words)))
        tree = CylinderTree.explicit(k, depth, dict(zip(words, ws)))
        assert optimal_cover_dp(tree).cost == pytest.approx(enumerate_cover_costs(tree).min(), rel=1e-12)

    @SLOW
    @given(systems(k=2), st.floats(0.1, 1.5), st.floats(0.05, 0.9))
    def test_hausdorff_monotone_in_s(self, sys, s, eps):
        try:
            a = hausdorff_value(sys, Full(), s, eps, "diam", 8).log_value
            b = hausdorff_value(sys, Full(), s + 0.1, eps, "diam", 8).log_value
        except InsufficientDepth:
            assume(False)
        assert b <= a + 1e-12

    @SLOW
    @given(systems(k=2), st.floats(-1, 1), st.sampled_from([0.2, 0.4, 0.7]), st.integers(2, 4), st.floats(0, 1.5))
    def test_pressure_monotone_in_N(self, sys, t, delta, N, s):
        try:
            lo = PressureProblem(sys, Full(), t, N, delta, 9).value(s, witness=False).log_value
            hi = PressureProblem(sys, Full(), t, N + 1, delta, 9).value(s, witness=False).log_value
        except InsufficientDepth:
            assume(False)
        assert hi >= lo - 1e-10

    @SLOW
    @given(systems(k=2), st.floats(0.3, 1.5))
    def test_union_subadditive(self, sys, s):
        Z1, Z2 = Subshift(("11",)), FrequencyWindow({1: (0.6, 1.0)})
        eps = 0.45
        vals = [HausdorffProblem(sys, Z, eps, "diam", 8).value(s, witness=False).value for Z in (UnionOf((Z1, Z2)), Z1, Z2)]
        assert vals[0] <= vals[1] + vals[2] + 1e-10 * max(vals)


class TestCurves:
    weighted = st.lists(thetas, min_size=2, max_size=4).filter(lambda v: max(v) - min(v) > 0.1)

    @SETTINGS
    @given(weighted, st.floats(-3, 3), st.floats(-3, 3))
    def test_convex(self, th, t1, t2):
        c = closed_form_curve(ShiftSystem(len(th), WeightedProduct(tuple(th))))
        assert c(0.5 * (t1 + t2)) <= 0.5 * (c(t1) + c(t2)) + 1e-10

    @SETTINGS
    @given(weighted)
    def test_root_bracket_and_residual(self, th):
        c = closed_form_curve(ShiftSystem(len(th), WeightedProduct(tuple(th))))
        lo, hi = c.h_top / c.beta, c.h_top / c.alpha
        assert c(lo) >= -1e-10 and c(hi) <= 1e-10
        r = bowen_root(c, tol=1e-12)
        assert lo <= r.t <= hi
        assert abs(r.residual) <= c.alpha * 1e-12

    @SLOW
    @given(weighted)
    def test_spectrum_identities(self, th):
        c = closed_form_curve(ShiftSystem(len(th), WeightedProduct(tuple(th))))
        table = spectrum_table(c, 21)
        assert all(r.L_D * r.alpha == r.L_E for r in table.rows)
        le = table.column("L_E")
        assert np.all(le[1:-1] >= 0.5 * (le[:-2] + le[2:]) - 1e-8)
        assert legendre_entropy(c, -c.slope(0.0)).value == pytest.approx(c(0.0), abs=1e-8)
