import io
import json
import math

import pytest

from config import get_config
from experiments import (
    ResultRow,
    SweepSpec,
    SweepVariable,
    max_reductions,
    read_rows_csv,
    rows_to_csv,
    rows_to_json,
    run_sweep,
)
import experiments.sweeps as sweeps
from model.scenario import generate_scenario
from solvers.alternating import BaselineMode
from utils.error_handling import ValidationError


def _row(value, mode, mean, infeasible=0):
    return ResultRow(
        variable="absorption_a",
        value=value,
        mode=mode,
        mean_delay_s=mean,
        min_delay_s=mean * 0.9 if math.isfinite(mean) else mean,
        max_delay_s=mean * 1.1 if math.isfinite(mean) else mean,
        mean_iters=3.5,
        trials=4,
        infeasible_trials=infeasible,
    )


class TestSweepSpec:
    def test_default_grid(self):
        spec = SweepSpec.default("num_users", trials=2)
        assert spec.variable is SweepVariable.USERS
        assert list(spec.values) == get_config("experiments")["grids"]["num_users"]
        assert spec.modes == (BaselineMode.PROPOSED, BaselineMode.OL, BaselineMode.OP, BaselineMode.OW)

    def test_variables(self):
        assert SweepVariable("altitude").override_key == "H_m"
        assert SweepVariable.USERS.override_key is None
        assert SweepVariable.ABSORPTION.energy_budget == 8.0

    @pytest.mark.parametrize(
        "values, trials",
        [((), 1), ((0.01, 0.005), 1), ((0.005, 0.005), 1), ((0.005,), 0)],
    )
    def test_rejects_bad_specs(self, values, trials):
        with pytest.raises(ValidationError):
            SweepSpec(variable=SweepVariable.ABSORPTION, values=values, trials=trials)

    def test_user_counts_must_be_integers(self):
        with pytest.raises(ValidationError):
            SweepSpec(variable="num_users", values=(4, 6.5), trials=1)


class TestRunSweep:
    @pytest.fixture
    def spec(self):
        return SweepSpec(
            variable=SweepVariable.ABSORPTION,
            values=(0.005, 0.01),
            trials=2,
            modes=(BaselineMode.PROPOSED, BaselineMode.OP),
        )

    @pytest.fixture
    def base(self):
        return generate_scenario(1, 4, {"Q_joules": 8.0})

    def test_rows_are_ordered_and_complete(self, spec, base):
        rows = run_sweep(spec, base, seed=1, workers=1)
        assert [(row.value, row.mode) for row in rows] == [
            (0.005, "Proposed"),
            (0.005, "OP"),
            (0.01, "Proposed"),
            (0.01, "OP"),
        ]
        for row in rows:
            assert row.trials == 2 and row.infeasible_trials == 0
            assert row.min_delay_s <= row.mean_delay_s <= row.max_delay_s

    def test_proposed_is_no_worse_on_paired_layouts(self, spec, base):
        rows = run_sweep(spec, base, seed=1, workers=1)
        by_key = {(row.value, row.mode): row for row in rows}
        for value in spec.values:
            assert by_key[(value, "Proposed")].mean_delay_s <= by_key[(value, "OP")].mean_delay_s * (1.0 + 1e-9)
        assert max_reductions(rows)["OP"] >= -1e-9

    def test_deterministic(self, spec, base):
        assert rows_to_csv(run_sweep(spec, base, seed=1, workers=1)) == rows_to_csv(
            run_sweep(spec, base, seed=1, workers=1)
        )

    def test_user_count_sweep(self, base):
        spec = SweepSpec(variable="num_users", values=(2, 3), trials=1, modes=("OP",))
        rows = run_sweep(spec, base, seed=4, workers=1)
        assert [row.value for row in rows] == [2.0, 3.0]

    def test_infeasible_trials_are_counted(self, spec):
        starved = generate_scenario(1, 4, {"Q_joules": 1e-9})
        rows = run_sweep(spec, starved, seed=1, workers=1)
        for row in rows:
            assert row.trials == 2
            assert row.infeasible_trials == 2
            assert math.isnan(row.mean_delay_s)

    def test_rejects_bad_worker_count(self, spec, base):
        with pytest.raises(ValidationError):
            run_sweep(spec, base, seed=1, workers=0)

    def test_only_infeasibility_is_counted(self, spec, base, monkeypatch):
        def broken(*args, **kwargs):
            raise ValidationError("Bad block input")

        monkeypatch.setattr(sweeps, "run_baseline", broken)
        with pytest.raises(ValidationError):
            run_sweep(spec, base, seed=1, workers=1)

    def test_proposed_feasible_wherever_baselines_are(self):
        # 14 users at 8 J leaves several budgets tight after the power step
        spec = SweepSpec(
            variable=SweepVariable.ABSORPTION,
            values=(0.0025, 0.0075),
            trials=3,
            modes=(BaselineMode.PROPOSED, BaselineMode.OL, BaselineMode.OW),
        )
        rows = run_sweep(spec, generate_scenario(1, 14, {"Q_joules": 8.0}), seed=1, workers=1)
        by_key = {(row.value, row.mode): row for row in rows}
        for value in spec.values:
            proposed = by_key[(value, "Proposed")]
            for mode in ("OL", "OW"):
                baseline = by_key[(value, mode)]
                if baseline.infeasible_trials == 0:
                    assert proposed.infeasible_trials == 0
                    assert proposed.mean_delay_s <= baseline.mean_delay_s * (1.0 + 1e-9)


class TestResultFiles:
    def test_csv_round_trip(self, tmp_path):
        rows = [_row(0.005, "Proposed", 101.25), _row(0.005, "OL", 1.0 / 3.0)]
        path = tmp_path / "rows.csv"
        text = rows_to_csv(rows, path)
        assert path.read_text() == text
        assert text.splitlines()[0] == ",".join(get_config("experiments")["csv_columns"])
        assert read_rows_csv(path) == rows
        assert read_rows_csv(io.StringIO(text)) == rows

    def test_csv_missing_columns(self):
        with pytest.raises(ValidationError):
            read_rows_csv(io.StringIO("variable,value\nabsorption_a,0.005\n"))

    def test_json_nulls_for_nan(self):
        payload = json.loads(rows_to_json([_row(0.01, "OW", math.nan, infeasible=4)]))
        assert payload[0]["mean_delay_s"] is None
        assert payload[0]["infeasible_trials"] == 4

    def test_max_reductions(self):
        rows = [
            _row(0.005, "Proposed", 80.0),
            _row(0.005, "OL", 100.0),
            _row(0.005, "OW", 90.0),
            _row(0.01, "Proposed", 50.0),
            _row(0.01, "OL", 200.0),
            _row(0.01, "OW", math.nan, infeasible=4),
        ]
        reductions = max_reductions(rows)
        assert reductions["OL"] == pytest.approx(0.75)
        assert reductions["OW"] == pytest.approx(1.0 / 9.0)


def _proposed_means(variable: str):
    variable = SweepVariable(variable)
    spec = SweepSpec.default(variable, trials=20, modes=(BaselineMode.PROPOSED,))
    base = generate_scenario(1, 14, {"Q_joules": variable.energy_budget})
    rows = run_sweep(spec, base, seed=1, workers=1)
    assert all(row.infeasible_trials == 0 for row in rows)
    return [row.mean_delay_s for row in rows]


@pytest.mark.slow
class TestTrends:
    def test_delay_grows_with_absorption(self):
        means = _proposed_means("absorption_a")
        assert all(a < b for a, b in zip(means, means[1:]))

    def test_delay_falls_with_bandwidth(self):
        means = _proposed_means("total_bandwidth")
        assert all(a > b for a, b in zip(means, means[1:]))

    def test_delay_grows_with_altitude(self):
        means = _proposed_means("altitude")
        assert all(a < b for a, b in zip(means, means[1:]))

    def test_delay_grows_faster_with_each_user_step(self):
        means = _proposed_means("num_users")
        steps = [b - a for a, b in zip(means, means[1:])]
        assert all(step > 0 for step in steps)
        assert all(a < b for a, b in zip(steps, steps[1:]))
