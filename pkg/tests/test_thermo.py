import math

import numpy as np
import pytest
from scipy.optimize import brentq

from conftest import LOG2, PHI, geo, weighted
from shiftpress.errors import BracketInvalid, ConfigError, NotIrreducible
from shiftpress.symbolic import ShiftSystem, WeightedProduct
from shiftpress.targets import FrequencyWindow, Full, Subshift
from shiftpress.thermo import (
    bowen_root,
    closed_form_curve,
    cone_check,
    cone_grid,
    corrupt,
    entropy,
    perron,
    pressure_closed_form,
    sampled_curve,
)


def eig_pressure(sys, forbidden, t):
    """Independent oracle: spectral radius of the 1-block matrix (memory <= 1)."""
    k = sys.k
    A = np.ones((k, k)) if sys.transition is None else sys.transition.astype(float)
    for w in forbidden:
        A[int(w[0]) - 1, int(w[1]) - 1] = 0.0
    M = A * np.exp(-t * np.asarray(sys.log_a))[None, :]
    return math.log(max(abs(np.linalg.eigvals(M))))


class TestClosedForm:
    def test_entropy_full(self, w24):
        assert pressure_closed_form(w24, Full(), 0.0) == pytest.approx(LOG2, rel=1e-14)

    def test_weighted_t1(self, w24):
        assert pressure_closed_form(w24, Full(), 1.0) == pytest.approx(math.log(0.75), rel=1e-14)

    @pytest.mark.parametrize("t", [-2.0, -0.5, 0.0, 0.7, 3.0])
    def test_golden_line(self, t):
        sys = weighted((2, 2))
        assert pressure_closed_form(sys, Subshift(("11",)), t) == pytest.approx(math.log(PHI) - t * LOG2, abs=1e-12)

    @pytest.mark.parametrize("t", [-1.5, 0.0, 0.4, 2.0])
    def test_vs_eigenvalue_oracle(self, t):
        sys = ShiftSystem(3, WeightedProduct((2, 3, 5)))
        Z = Subshift(("12", "33"))
        assert pressure_closed_form(sys, Z, t) == pytest.approx(eig_pressure(sys, ("12", "33"), t), abs=1e-11)

    def test_longer_memory_vs_count(self, geo2):
        # entropy = lim (1/n) log #words; compare with growth of exact counts
        from shiftpress.targets import word_count

        Z = Subshift(("111", "212"))
        h = entropy(geo2, Z)
        r = word_count(geo2, Z, 41) / word_count(geo2, Z, 40)
        assert h == pytest.approx(math.log(r), abs=1e-6)

    def test_perron(self):
        M = np.array([[1.0, 1.0], [1.0, 0.0]])
        assert perron(M).log_rho == pytest.approx(math.log(PHI), abs=1e-13)


class TestEntropy:
    def test_full(self, geo2):
        assert entropy(geo2, Full()) == pytest.approx(LOG2)

    def test_golden(self, geo2, no11):
        assert entropy(geo2, no11) == pytest.approx(math.log(PHI), abs=1e-12)

    def test_two_fixed_points(self, geo2):
        assert entropy(geo2, Subshift(("12", "21"))) == pytest.approx(0.0, abs=1e-12)

    def test_reducible_pressure_refused(self, geo2):
        with pytest.raises(NotIrreducible):
            pressure_closed_form(geo2, Subshift(("12", "21")), 0.5)

    def test_frequency_target_refused(self, geo2):
        with pytest.raises(ConfigError):
            pressure_closed_form(geo2, FrequencyWindow({1: (0.2, 0.4)}), 0.5)


class TestBowenRoot:
    def test_weighted(self, w24):
        curve = closed_form_curve(w24)
        r = bowen_root(curve, tol=1e-12)
        oracle = brentq(lambda s: 2.0**-s + 4.0**-s - 1.0, 0.1, 2.0, xtol=1e-15)
        assert r.t == pytest.approx(oracle, abs=1e-9)
        assert r.t == pytest.approx(math.log(PHI, 2), abs=1e-9)
        assert r.bracket == pytest.approx((0.5, 1.0))
        assert abs(r.residual) <= curve.alpha * 1e-12

    def test_constant_theta3(self):
        r = bowen_root(closed_form_curve(geo(3)))
        assert r.t == pytest.approx(LOG2 / math.log(3), abs=1e-9)

    def test_zero_entropy(self, geo2):
        # singleton {1^inf} modelled as a curve with T(t) = -t log 2
        curve = closed_form_curve(geo2)
        r = bowen_root(curve, h_top=0.0, alpha=LOG2, beta=LOG2)
        assert r.t == 0.0

    def test_bad_bracket(self, w24):
        with pytest.raises(BracketInvalid):
            bowen_root(closed_form_curve(w24), alpha=0.0)


class TestCone:
    def test_weighted_no_violations(self, w24):
        rep = cone_check(closed_form_curve(w24), cone_grid(), LOG2, 2 * LOG2)
        assert rep.ok and rep.checked == 61 * 3

    def test_constant_equalities(self):
        rep = cone_check(closed_form_curve(geo(3)), cone_grid())
        assert rep.ok and abs(rep.worst_margin) < 1e-12

    def test_corrupted_curve(self, w24):
        bad = corrupt(closed_form_curve(w24), 0.5, 0.5)
        rep = cone_check(bad, cone_grid())
        assert not rep.ok
        assert all(math.isclose(v.t, 0.5) or math.isclose(v.t + v.h, 0.5) for v in rep.violations)

    def test_sampled_slack(self, w24):
        curve = closed_form_curve(w24)
        ts = np.linspace(-2, 2, 9)
        s = sampled_curve(ts, [curve(t) for t in ts], error=0.01)
        assert cone_check(s, cone_grid(-2, 1, 0.5, (0.5, 1.0))).ok

    def test_convexity(self, w24):
        curve = closed_form_curve(w24)
        ts = np.linspace(-3, 3, 61)
        for a, b in zip(ts[:-2], ts[2:]):
            assert curve(0.5 * (a + b)) <= 0.5 * (curve(a) + curve(b)) + 1e-10

    def test_clamped_domain(self, w24):
        curve = closed_form_curve(w24)
        assert math.isfinite(curve(1e6)) and curve(1e6) == curve(64.0)
