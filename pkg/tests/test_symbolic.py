import math

import numpy as np
import pytest

from conftest import geo, weighted
from shiftpress.errors import ConfigError, DepthExceeded, InvalidDepth
from shiftpress.symbolic import (
    SequencePoint,
    ShiftSystem,
    Table,
    WeightedProduct,
    ball_to_cylinder,
    bowen_ball_to_cylinder,
    common_prefix_length,
    conformal_factor,
    distance,
    psi_weight,
    system_from_config,
    system_to_config,
    validate_metric,
)


def P(pre, per):
    return SequencePoint(pre, per)


class TestPsi:
    def test_geometric_length_three(self):
        assert psi_weight(geo(2).psi, (1, 2, 1)) == pytest.approx(0.125, rel=1e-15)

    def test_weighted_harmonic(self):
        psi = WeightedProduct((2, 4), harmonic_factor=True)
        assert psi_weight(psi, (1, 1, 2)) == pytest.approx(1 / 48, rel=1e-14)

    @pytest.mark.parametrize("psi", [geo(3).psi, WeightedProduct((2, 4)), WeightedProduct((1, 4), True)])
    def test_empty_word_is_one(self, psi):
        assert psi_weight(psi, ()) == 1.0

    def test_table_lookup_and_cap(self):
        t = Table({"1": 0.5, "2": 0.25}, depth_cap=1)
        assert psi_weight(t, (2,)) == 0.25
        assert psi_weight(t, ()) == 1.0
        with pytest.raises(DepthExceeded):
            psi_weight(t, (1, 1))

    def test_table_missing_word(self):
        t = Table({"1": 0.5}, depth_cap=2)
        with pytest.raises(DepthExceeded):
            psi_weight(t, (2,))

    def test_bad_theta(self):
        with pytest.raises(ConfigError):
            geo(1.0)
        with pytest.raises(ConfigError):
            WeightedProduct((0.5, 2))


class TestPoints:
    def test_normal_form(self):
        assert P("12", "12") == P("", "12")
        assert P("", "1212") == P("", "12")
        assert P("2", "12") == P("", "21")

    def test_shift_and_prefix(self):
        x = P("3", "12")
        assert x.prefix(5) == (3, 1, 2, 1, 2)
        assert x.shift(2).prefix(3) == (2, 1, 2)

    def test_common_prefix(self):
        assert common_prefix_length(P("", "1"), P("", "1")) is None
        assert common_prefix_length(P("11", "2"), P("", "1")) == 2


class TestDistance:
    def test_identity(self, geo2):
        x = P("21", "12")
        assert distance(geo2, x, x) == 0.0

    def test_geometric(self, geo2):
        assert distance(geo2, P("", "1"), P("11", "2")) == pytest.approx(0.25, rel=1e-15)

    def test_weighted_harmonic(self, w24h):
        assert distance(w24h, P("1", "2"), P("12", "1")) == pytest.approx(1 / 16, rel=1e-14)

    def test_first_symbols_differ(self, geo2):
        assert distance(geo2, P("", "1"), P("", "2")) == 1.0


class TestConformalFactor:
    def test_geometric(self, geo2):
        for n in (2, 5, 9):
            cf = conformal_factor(geo2, P("", "12"), n)
            assert cf.ratio == pytest.approx(2.0, rel=1e-15)
            assert cf.limit == 2.0

    def test_weighted_harmonic(self, w24h):
        cf = conformal_factor(w24h, P("", "1"), 5)
        assert cf.ratio == pytest.approx(2.5, rel=1e-14)
        assert cf.limit == 2.0

    def test_weighted_telescoping(self, w24):
        cf = conformal_factor(w24, P("2", "1"), 3)
        assert cf.ratio == pytest.approx(4.0, rel=1e-15)

    def test_depth_guard(self, geo2):
        with pytest.raises(InvalidDepth):
            conformal_factor(geo2, P("", "1"), 1)


class TestBalls:
    def test_geometric(self, geo2):
        assert ball_to_cylinder(geo2, P("", "1"), 0.3) == 2

    def test_large_radius(self, geo2):
        assert ball_to_cylinder(geo2, P("", "1"), 1.5) == 0

    def test_weighted(self, w24):
        assert ball_to_cylinder(w24, P("21", "1"), 0.2) == 2

    def test_radius_equal_to_psi_is_not_inside(self, geo2):
        # the ball is open: psi(w) = r does not count
        assert ball_to_cylinder(geo2, P("", "1"), 0.25) == 3

    def test_bowen_geometric(self, geo2):
        assert bowen_ball_to_cylinder(geo2, P("", "12"), 3, 0.3) == 5

    def test_bowen_whole_space(self, geo2):
        assert bowen_ball_to_cylinder(geo2, P("", "12"), 7, 2.0) == 0

    def test_bowen_weighted(self, w24):
        assert bowen_ball_to_cylinder(w24, P("", "2"), 2, 0.3) == 3

    def test_bowen_negative_order(self, geo2):
        with pytest.raises(InvalidDepth):
            bowen_ball_to_cylinder(geo2, P("", "1"), -1, 0.3)


class TestValidateMetric:
    def test_geometric_passes(self, geo2):
        assert validate_metric(geo2, 10).ok

    def test_theta_one_without_harmonic_fails(self):
        rep = validate_metric(weighted((1, 4)), 10)
        assert not rep.ok
        assert "monotonicity" in {v.check for v in rep.violations}
        assert rep.violations[0].where == "11"

    def test_theta_one_with_harmonic_passes(self):
        assert validate_metric(weighted((1, 4), harmonic=True), 10).ok


class TestConfig:
    def test_round_trip(self):
        for sys in (geo(2), weighted((2, 4), True), geo(2, transition=[[1, 1], [1, 0]])):
            again = system_from_config(system_to_config(sys))
            assert again.k == sys.k and again.psi == sys.psi and again.log_a == sys.log_a
            assert (again.transition is None) == (sys.transition is None)

    def test_log_a_defaults(self, w24):
        assert w24.log_a == (math.log(2), math.log(4))

    def test_table_needs_log_a(self):
        with pytest.raises(ConfigError):
            ShiftSystem(2, Table({"1": 0.5, "2": 0.5}, 1))

    def test_dead_symbol(self):
        with pytest.raises(ConfigError):
            ShiftSystem(2, geo(2).psi, np.array([[1, 0], [1, 0]]))

    @pytest.mark.parametrize(
        "bad",
        [
            {"alphabet_size": 1, "psi": {"kind": "geometric", "theta": 2}},
            {"alphabet_size": 2, "psi": {"kind": "nope"}},
            {"alphabet_size": 2, "psi": {"kind": "weighted", "thetas": [2, 3, 4]}},
        ],
    )
    def test_rejects(self, bad):
        with pytest.raises(ConfigError):
            system_from_config(bad)
