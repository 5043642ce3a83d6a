import math

import numpy as np
import pytest

from conftest import build_scenario, reference_energy, reference_objective
from model.channel import (
    channel_gain,
    distance,
    distances,
    downlink_delay,
    snr_coefficient,
    uplink_delay,
    uplink_rate,
)
from model.objective import constraint_report, derive_links, total_objective, uplink_energy
from model.scenario import (
    dumps_scenario,
    generate_scenario,
    load_scenario,
    loads_scenario,
    save_scenario,
    scenario_overrides,
)
from model.types import Decision, RadioConstants, Scenario, UserSpec
from utils.error_handling import DomainError, ScenarioFormatError, ValidationError


def _user(x=0.0, y=0.0):
    return UserSpec(x=x, y=y, D=1e12, E=1e12, Q=1.0, P=0.1)


class TestChannel:
    def test_distance_directly_below(self):
        assert distance(_user(), 0.0, 0.0, 20.0) == 20.0

    def test_distance_low_altitude(self):
        assert distance(_user(30.0, 40.0), 0.0, 0.0, 0.001) == pytest.approx(50.0, abs=1e-7)

    def test_distance_needs_positive_altitude(self):
        with pytest.raises(DomainError):
            distance(_user(3.0, 4.0), 0.0, 0.0, 0.0)

    def test_distances_shape(self):
        positions = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
        d = distances(positions, np.zeros((4, 5)), np.zeros((4, 5)), 20.0)
        assert d.shape == (4, 5, 3)
        assert np.all(d >= 20.0)

    def test_channel_gain(self):
        assert channel_gain(1.0, 0.0) == 1.0
        assert channel_gain(10.0, 0.005) == pytest.approx(1e-2 * math.exp(-0.05), rel=1e-15)
        assert channel_gain(20.0, 0.005) < channel_gain(10.0, 0.005)
        assert channel_gain(10.0, 0.01) < channel_gain(10.0, 0.005)
        with pytest.raises(DomainError):
            channel_gain(0.0, 0.005)

    def test_snr_coefficient_at_minimum_distance(self, table_radio):
        # reference constants: w = 10 GHz, p = 1 mW, d = 10 m
        e = 1.0 + snr_coefficient(10e9, 10.0, table_radio) * 1e-3
        assert e == pytest.approx(24.894, abs=1e-3)

    def test_snr_coefficient_scaling(self, table_radio):
        k = snr_coefficient(10e9, 30.0, table_radio)
        assert snr_coefficient(20e9, 30.0, table_radio) == pytest.approx(k / 2.0, rel=1e-15)
        flat = RadioConstants(h0_db=-40.0, sigma2_dbm_per_hz=-174.0, a=0.0, f=1.2e12)
        assert snr_coefficient(10e9, 30.0, flat) == pytest.approx(
            flat.h0 / (10e9 * 900.0 * flat.sigma2), rel=1e-14
        )

    def test_snr_coefficient_rejects_nonpositive(self, table_radio):
        with pytest.raises(DomainError):
            snr_coefficient(0.0, 10.0, table_radio)
        with pytest.raises(DomainError):
            snr_coefficient(1e9, -1.0, table_radio)

    def test_uplink_rate(self):
        assert uplink_rate(0.0, 1e9, 10.0) == 0.0
        assert uplink_rate(1.0, 1.0, 1.0) == pytest.approx(1.0, rel=1e-15)
        assert uplink_rate(1.0, 10e9, 23.0) == pytest.approx(10e9 * math.log2(24.0), rel=1e-14)
        rates = uplink_rate(np.array([0.1, 0.2, 0.3]), 1e9, 10.0)
        assert np.all(np.diff(rates) > 0)
        assert np.all(np.diff(rates, 2) < 0)

    def test_delays(self):
        assert uplink_delay(10.0, 5.0) == 2.0
        assert downlink_delay(10.0, 0.0) == math.inf
        with pytest.raises(DomainError):
            uplink_delay(10.0, -1.0)


class TestTypes:
    def test_radio_conversions(self, table_radio):
        assert table_radio.h0 == pytest.approx(1e-4, rel=1e-12)
        assert table_radio.sigma2 == pytest.approx(3.981e-21, rel=1e-3)
        linear = RadioConstants.from_linear(table_radio.h0, table_radio.sigma2, 0.005)
        assert linear.h0 == pytest.approx(table_radio.h0, rel=1e-12)
        assert linear.sigma2 == pytest.approx(table_radio.sigma2, rel=1e-12)

    def test_radio_rejects_negative_absorption(self):
        with pytest.raises(ValidationError):
            RadioConstants(h0_db=-40.0, sigma2_dbm_per_hz=-174.0, a=-0.1, f=1e12)

    def test_user_rejects_nonpositive_budget(self):
        with pytest.raises(ValidationError):
            UserSpec(x=0.0, y=0.0, D=1e12, E=1e12, Q=0.0, P=0.1)

    def test_scenario_rejects_user_outside_area(self, table_radio):
        with pytest.raises(ValidationError):
            Scenario(users=(_user(60.0, 10.0),), radio=table_radio, H=20.0, q=2.0, B_W=1e11, area_side=50.0)

    def test_scenario_rejects_zero_altitude(self, table_radio):
        with pytest.raises(ValidationError):
            Scenario(users=(_user(),), radio=table_radio, H=0.0, q=2.0, B_W=1e11, area_side=50.0)

    def test_decision_validation(self):
        with pytest.raises(ValidationError):
            Decision(x=0.0, y=0.0, p=[0.1, 0.1], w=[1e9])
        with pytest.raises(ValidationError):
            Decision(x=0.0, y=0.0, p=[0.0], w=[1e9])
        with pytest.raises(ValidationError):
            Decision(x=0.0, y=0.0, p=[0.1], w=[-1e9])

    def test_decision_replace_and_same_as(self):
        dec = Decision(x=1.0, y=2.0, p=[0.1, 0.05], w=[4e10, 6e10])
        moved = dec.replace(x=3.0)
        assert moved.x == 3.0 and np.array_equal(moved.p, dec.p)
        assert dec.same_as(Decision(x=1.0, y=2.0, p=[0.1, 0.05], w=[4e10, 6e10]))
        assert not dec.same_as(moved)
        assert dec.to_dict() == {"x_m": 1.0, "y_m": 2.0, "p_watts": [0.1, 0.05], "w_hz": [4e10, 6e10]}


class TestObjective:
    def test_matches_reference_evaluator(self, reference_scenario):
        s = reference_scenario
        w = np.full(s.N, s.B_W / s.N)
        p = np.full(s.N, 0.01)
        dec = Decision(x=20.0, y=30.0, p=p, w=w)
        assert total_objective(s, dec) == pytest.approx(reference_objective(s, 20.0, 30.0, p, w), rel=1e-12)
        assert np.allclose(uplink_energy(s, dec), reference_energy(s, 20.0, 30.0, p, w), rtol=1e-12)

    def test_reference_delay_is_finite(self, reference_scenario):
        s = reference_scenario
        dec = Decision(x=25.0, y=25.0, p=np.full(s.N, 0.01), w=np.full(s.N, s.B_W / s.N))
        value = total_objective(s, dec)
        assert math.isfinite(value) and value > 0

    def test_derived_links(self, reference_scenario):
        s = reference_scenario
        dec = Decision(x=25.0, y=25.0, p=np.full(s.N, 0.01), w=np.full(s.N, s.B_W / s.N))
        links = derive_links(s, dec)
        assert np.all(links.d >= s.H)
        assert np.all(links.e > 1.0)
        assert np.allclose(links.t_up, s.D / links.r_up)
        assert np.array_equal(links.A, links.t_dn)
        assert np.allclose(links.l, s.D / (dec.w * s.Q))

    def test_dimension_mismatch(self, reference_scenario):
        dec = Decision(x=25.0, y=25.0, p=[0.01], w=[1e9])
        with pytest.raises(ValidationError):
            total_objective(reference_scenario, dec)

    def test_constraint_report(self):
        s = build_scenario([(10.0, 10.0), (40.0, 40.0)], Q=1e6)
        dec = Decision(x=25.0, y=25.0, p=[0.1, 0.1], w=[5e10, 5e10])
        report = constraint_report(s, dec)
        assert report.feasible
        assert report.bandwidth_residual == 0.0

        short = constraint_report(s, dec.replace(w=[5e10, 4e10]))
        assert not short.feasible
        assert short.bandwidth_residual == pytest.approx(0.1)

        over = constraint_report(s, dec.replace(p=[0.2, 0.1]))
        assert not over.feasible
        assert over.power_violations[0] == pytest.approx(0.1)

    def test_energy_violation_reported(self):
        s = build_scenario([(10.0, 10.0), (40.0, 40.0)], Q=1e-3)
        report = constraint_report(s, Decision(x=25.0, y=25.0, p=[0.1, 0.1], w=[5e10, 5e10]))
        assert not report.feasible
        assert np.all(report.energy_violations > 0)
        assert report.to_dict()["feasible"] is False


class TestScenario:
    def test_generation_is_deterministic(self):
        assert generate_scenario(3, 14) == generate_scenario(3, 14)
        assert generate_scenario(3, 14) != generate_scenario(4, 14)

    def test_reference_values(self, reference_scenario):
        s = reference_scenario
        assert s.N == 14
        assert s.D[0] == 10e12 and s.D[4] == 10e12 and s.D[3] == 4e12
        assert s.E[1] == pytest.approx(6.4e12)
        assert np.all(s.Q == 8.0) and np.all(s.P == 0.1)
        assert (s.H, s.q, s.B_W, s.area_side) == (20.0, 2.0, 100e9, 50.0)
        assert np.all((s.positions >= 0) & (s.positions <= 50.0))

    def test_generation_rejects_bad_input(self):
        with pytest.raises(ValidationError):
            generate_scenario(1, 0)
        with pytest.raises(ValidationError):
            generate_scenario(-1, 4)
        with pytest.raises(ValidationError):
            generate_scenario(1, 4, {"altitude": 10.0})

    def test_overrides_reproduce_scenario(self):
        s = generate_scenario(5, 9, {"a_per_m": 0.01, "Q_joules": 2.0, "H_m": 30.0})
        assert generate_scenario(5, 9, scenario_overrides(s)) == s

    def test_json_round_trip(self, reference_scenario, tmp_path):
        assert loads_scenario(dumps_scenario(reference_scenario)) == reference_scenario
        path = tmp_path / "scenario.json"
        save_scenario(reference_scenario, path)
        assert load_scenario(path) == reference_scenario
        assert dumps_scenario(load_scenario(path)) == path.read_text()

    def test_json_rejects_unknown_keys(self, reference_scenario):
        text = dumps_scenario(reference_scenario).replace('"H_m"', '"altitude"')
        with pytest.raises(ScenarioFormatError):
            loads_scenario(text)

    def test_json_rejects_garbage(self):
        with pytest.raises(ScenarioFormatError):
            loads_scenario("{not json")
        with pytest.raises(ScenarioFormatError):
            loads_scenario('{"users": []}')
