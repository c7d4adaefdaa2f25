import math

import numpy as np
import pytest

from conftest import LOG2, geo
from shiftpress.errors import InvalidDepth, OutOfRange
from shiftpress.lyapunov import (
    Interval,
    ball_inclusion_check,
    birkhoff,
    classify_level_set,
    distortion_radius,
    exponent_bounds,
    tempered_certificate,
)
from shiftpress.symbolic import SequencePoint, random_point


def P(pre, per):
    return SequencePoint(pre, per)


class TestBirkhoff:
    def test_alternating(self, w24):
        assert birkhoff(w24, P("", "12"), 4) == pytest.approx(1.5 * LOG2, rel=1e-15)

    def test_constant_system(self):
        sys = geo(3)
        for n in (1, 7, 50):
            assert birkhoff(sys, P("21", "122"), n) == pytest.approx(math.log(3), rel=1e-15)

    def test_fixed_point(self, w24):
        assert all(birkhoff(w24, P("", "1"), n) == pytest.approx(LOG2) for n in (1, 10, 100))

    def test_raw_weights(self):
        assert birkhoff(None, [1.0, 2.0, 3.0], 3) == 2.0

    def test_invalid(self, w24):
        with pytest.raises(InvalidDepth):
            birkhoff(w24, P("", "1"), 0)


class TestExponentBounds:
    def test_period_average(self, w24):
        b = exponent_bounds(w24, P("", "12"), 10, 40)
        assert b.exact == pytest.approx(1.5 * LOG2)
        assert b.lower <= b.exact <= b.upper

    def test_preperiod_forgotten(self, w24):
        assert exponent_bounds(w24, P("222", "1"), 5, 20).exact == pytest.approx(LOG2)


class TestTempered:
    def test_expanding(self, w24, rng):
        for _ in range(20):
            x = random_point(w24, rng)
            for D in (1, 5, 30):
                c = tempered_certificate(w24, x, 0.1, D)
                assert c.infimum >= 0 and c.eta >= 1

    def test_alternating_weights(self):
        c = tempered_certificate(None, [-1.0, 2.0] * 3, 0.1, 6)
        assert c.infimum == pytest.approx(-0.9, abs=1e-15)
        assert c.argmin == (1, 0)

    def test_matches_exhaustive_scan(self, rng):
        w = rng.normal(0.2, 1.0, 25)
        eps, D = 0.05, 25
        expect = min(sum(w[k:n]) + n * eps for n in range(D + 1) for k in range(n + 1))
        assert tempered_certificate(None, w, eps, D).infimum == pytest.approx(expect, abs=1e-12)

    def test_monotone_in_eps_and_depth(self, rng):
        w = rng.normal(0.0, 1.0, 40)
        vals = [tempered_certificate(None, w, e, 30).infimum for e in (0.0, 0.1, 0.5)]
        assert vals == sorted(vals)
        vals = [tempered_certificate(None, w, 0.1, D).infimum for D in (5, 20, 40)]
        assert vals == sorted(vals, reverse=True)

    def test_bounded_contraction_eps_zero(self):
        c = tempered_certificate(None, [-1.0, 2.0] * 10, 0.0, 20)
        assert c.infimum == -1.0

    def test_negative_eps(self, w24):
        with pytest.raises(ValueError):
            tempered_certificate(w24, P("", "1"), -0.1, 5)


class TestLevelSets:
    def test_in(self, w24):
        assert classify_level_set(w24, P("", "12"), Interval(1.0, 1.1)) == "in"

    def test_out(self, w24):
        assert classify_level_set(w24, P("", "1"), Interval(1.0, 2.0)) == "out"

    def test_positive_half_line(self, w24, rng):
        for _ in range(10):
            assert classify_level_set(w24, random_point(w24, rng), Interval(0.0, math.inf)) == "in"

    def test_undecided_for_aperiodic_window(self):
        # weights whose running average oscillates across 0.5
        w = np.concatenate([np.ones(60), np.zeros(120), np.ones(240)])
        assert classify_level_set(None, w, Interval(0.5, 2.0), (50, 400)) == "undecided"


class TestBallInclusions:
    @pytest.mark.parametrize("n,delta", [(0, 0.3), (1, 0.5), (4, 0.3), (9, 1.0), (6, 0.07)])
    def test_geometric_eta_one(self, geo2, n, delta):
        for eps in (0.01, 0.3):
            rep = ball_inclusion_check(geo2, P("1", "21"), n, delta, eps, 1.0)
            assert rep.ok

    def test_weighted_random_points(self, w24, rng):
        eps = 0.2
        for _ in range(50):
            x = random_point(w24, rng)
            n = int(rng.integers(0, 12))
            delta = float(rng.uniform(0.05, 1.0))
            eta = tempered_certificate(w24, x, eps, max(n, 1)).eta
            assert ball_inclusion_check(w24, x, n, delta, eps, eta).ok

    def test_distortion_radius(self, geo2, w24, w24h):
        assert distortion_radius(geo2, 0.1) == 1.0
        assert distortion_radius(w24, 0.1) == 1.0
        assert 0 < distortion_radius(w24h, 0.1) < 1.0

    def test_delta_above_delta0(self, geo2):
        with pytest.raises(OutOfRange):
            ball_inclusion_check(geo2, P("", "1"), 2, 0.5, 0.1, 1.0, delta0=0.4)
