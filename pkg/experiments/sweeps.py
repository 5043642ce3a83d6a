"""
Parameter sweeps over absorption, bandwidth, number of users and altitude.

Every sweep point runs ``trials`` random layouts (trial seed = seed + trial)
and each layout is solved by every requested mode from the same initial
decision, so the modes are compared on paired instances.
"""

import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from config import get_config
from model.objective import total_objective
from model.scenario import generate_scenario, scenario_overrides
from model.types import Scenario
from solvers.alternating import BaselineMode, initial_decision, run_baseline
from utils.error_handling import EnergyInfeasible, InfeasibleInit, ValidationError, error_tracker, safe_execute
from utils.logging_config import log_info, log_warning
from utils.performance import get_system_metrics, monitor_performance


DEFAULT_MODES = (BaselineMode.PROPOSED, BaselineMode.OL, BaselineMode.OP, BaselineMode.OW)

# a trial counts as infeasible only for these; anything else is a bug and propagates
_INFEASIBLE = (EnergyInfeasible, InfeasibleInit)


class SweepVariable(Enum):
    ABSORPTION = "absorption_a"
    BANDWIDTH = "total_bandwidth"
    USERS = "num_users"
    ALTITUDE = "altitude"

    @property
    def override_key(self) -> Optional[str]:
        """Scenario override the variable sets; None for the number of users."""
        return {
            SweepVariable.ABSORPTION: "a_per_m",
            SweepVariable.BANDWIDTH: "B_W_hz",
            SweepVariable.USERS: None,
            SweepVariable.ALTITUDE: "H_m",
        }[self]

    @property
    def energy_budget(self) -> float:
        return float(get_config("experiments")["energy_budget"][self.value])


@dataclass(frozen=True)
class SweepSpec:
    variable: SweepVariable
    values: Tuple[float, ...]
    trials: int
    modes: Tuple[BaselineMode, ...] = DEFAULT_MODES

    def __post_init__(self):
        object.__setattr__(self, "variable", SweepVariable(self.variable))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "modes", tuple(BaselineMode(m) for m in self.modes))
        if not self.values:
            raise ValidationError("Sweep values must not be empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValidationError("Sweep values must be strictly increasing", details=f"values={self.values}")
        if int(self.trials) < 1:
            raise ValidationError("A sweep needs at least one trial", details=f"trials={self.trials}")
        if not self.modes:
            raise ValidationError("A sweep needs at least one mode")
        if self.variable is SweepVariable.USERS and any(v < 1 or v != int(v) for v in self.values):
            raise ValidationError("User counts must be positive integers", details=f"values={self.values}")

    @classmethod
    def default(
        cls,
        variable: Union[str, SweepVariable],
        trials: Optional[int] = None,
        modes: Optional[Sequence[BaselineMode]] = None,
    ) -> "SweepSpec":
        """Grid and trial count from the experiments config."""
        variable = SweepVariable(variable)
        cfg = get_config("experiments")
        return cls(
            variable=variable,
            values=tuple(cfg["grids"][variable.value]),
            trials=cfg["trials"] if trials is None else trials,
            modes=tuple(modes) if modes else DEFAULT_MODES,
        )


@dataclass(frozen=True)
class ResultRow:
    variable: str
    value: float
    mode: str
    mean_delay_s: float
    min_delay_s: float
    max_delay_s: float
    mean_iters: float
    trials: int
    infeasible_trials: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _trial_task(
    variable: SweepVariable, value: float, trial_seed: int, N: int, overrides: Dict[str, Any], modes: Sequence[str]
) -> List[Tuple[str, float, float]]:
    """(mode, objective, iterations) per mode; NaN objective when the mode failed."""
    overrides = dict(overrides)
    if variable is SweepVariable.USERS:
        N = int(value)
    else:
        overrides[variable.override_key] = value

    s = generate_scenario(trial_seed, N, overrides)
    init = safe_execute(
        lambda: initial_decision(s),
        error_message=f"Trial seed {trial_seed} at {variable.value}={value:g}: no feasible start",
        errors=_INFEASIBLE,
    )
    results = []
    for mode_name in modes:
        mode = BaselineMode(mode_name)
        outcome = None
        if init is not None:
            outcome = safe_execute(
                lambda: run_baseline(s, mode, init),
                error_message=f"Trial seed {trial_seed} at {variable.value}={value:g}: {mode.value} infeasible",
                errors=_INFEASIBLE,
            )
        if outcome is None:
            results.append((mode.value, math.nan, math.nan))
        else:
            dec, trace = outcome
            results.append((mode.value, total_objective(s, dec), float(len(trace.iterations))))
    return results


def _run_task(task: Tuple) -> List[Tuple[str, float, float]]:
    return _trial_task(*task)


def _aggregate(spec: SweepSpec, records: List[Dict[str, Any]]) -> List[ResultRow]:
    frame = pd.DataFrame.from_records(records, columns=["value", "trial", "mode", "objective", "iters"])
    grouped = frame.groupby(["value", "mode"], sort=False)
    summary = grouped.agg(
        mean_delay_s=("objective", "mean"),
        min_delay_s=("objective", "min"),
        max_delay_s=("objective", "max"),
        mean_iters=("iters", "mean"),
        trials=("objective", "size"),
        infeasible_trials=("objective", lambda col: int(col.isna().sum())),
    ).reset_index()

    rows = []
    for entry in summary.itertuples(index=False):
        mean = float(entry.mean_delay_s)
        if entry.trials > entry.infeasible_trials:
            mean = min(max(mean, float(entry.min_delay_s)), float(entry.max_delay_s))
        rows.append(
            ResultRow(
                variable=spec.variable.value,
                value=float(entry.value),
                mode=str(entry.mode),
                mean_delay_s=mean,
                min_delay_s=float(entry.min_delay_s),
                max_delay_s=float(entry.max_delay_s),
                mean_iters=float(entry.mean_iters),
                trials=int(entry.trials),
                infeasible_trials=int(entry.infeasible_trials),
            )
        )
    return rows


@monitor_performance()
def run_sweep(
    spec: SweepSpec,
    base: Scenario,
    seed: int,
    workers: Optional[int] = None,
    progress: bool = False,
) -> List[ResultRow]:
    """Run every (value, trial, mode) of ``spec`` on layouts drawn like ``base``.

    ``base`` supplies every constant except the swept one; user positions
    are redrawn per trial. Failed trials are counted, not raised. Rows come
    out ordered by value, then mode in ``spec.modes`` order.
    """
    workers = get_config("performance")["max_workers"] if workers is None else int(workers)
    if workers < 1:
        raise ValidationError("workers must be at least 1", details=f"workers={workers}")
    overrides = scenario_overrides(base)
    modes = [mode.value for mode in spec.modes]
    tasks = [
        (spec.variable, value, seed + trial, base.N, overrides, modes)
        for value in spec.values
        for trial in range(spec.trials)
    ]
    log_info(
        f"Sweep over {spec.variable.value} started",
        points=len(spec.values),
        trials=spec.trials,
        modes=",".join(modes),
        workers=workers,
        system=get_system_metrics(),
    )

    errors_before = error_tracker.get_error_summary()["total"]
    if workers == 1:
        outcomes = list(tqdm(map(_run_task, tasks), total=len(tasks), disable=not progress, file=sys.stderr, desc="trials"))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(
                tqdm(pool.map(_run_task, tasks), total=len(tasks), disable=not progress, file=sys.stderr, desc="trials")
            )

    records = []
    for (_, value, trial_seed, _, _, _), results in zip(tasks, outcomes):
        for mode, objective, iters in results:
            records.append(
                {"value": float(value), "trial": trial_seed - seed, "mode": mode, "objective": objective, "iters": iters}
            )
    rows = _aggregate(spec, records)

    failed = sum(row.infeasible_trials for row in rows)
    if failed:
        log_warning(
            "Sweep skipped infeasible trials",
            failed=failed,
            errors_logged=error_tracker.get_error_summary()["total"] - errors_before,
        )
    log_info(f"Sweep over {spec.variable.value} finished", rows=len(rows))
    return rows


def max_reductions(rows: Sequence[ResultRow]) -> Dict[str, float]:
    """Largest relative reduction of Proposed's mean delay against each other mode, over the sweep values."""
    proposed = {row.value: row.mean_delay_s for row in rows if row.mode == BaselineMode.PROPOSED.value}
    reductions: Dict[str, float] = {}
    for row in rows:
        if row.mode == BaselineMode.PROPOSED.value or row.value not in proposed:
            continue
        if not (np.isfinite(row.mean_delay_s) and np.isfinite(proposed[row.value])) or row.mean_delay_s <= 0:
            continue
        reduction = (row.mean_delay_s - proposed[row.value]) / row.mean_delay_s
        reductions[row.mode] = max(reductions.get(row.mode, -math.inf), reduction)
    for mode, value in reductions.items():
        log_info(f"Maximum reduction against {mode}", reduction=f"{100.0 * value:.1f}%")
    return reductions


def rows_to_frame(rows: Sequence[ResultRow]) -> pd.DataFrame:
    columns = get_config("experiments")["csv_columns"]
    return pd.DataFrame([row.to_dict() for row in rows], columns=columns)


def rows_to_csv(rows: Sequence[ResultRow], path: Optional[Union[str, Path]] = None) -> str:
    """CSV text with shortest round-trip float formatting; written to ``path`` when given."""
    text = rows_to_frame(rows).to_csv(index=False, lineterminator="\n")
    if path is not None:
        Path(path).write_text(text)
    return text


def read_rows_csv(source: Union[str, Path, io.StringIO]) -> List[ResultRow]:
    frame = pd.read_csv(source, float_precision="round_trip")
    missing = set(get_config("experiments")["csv_columns"]) - set(frame.columns)
    if missing:
        raise ValidationError("Result CSV is missing columns", details=f"columns: {sorted(missing)}")
    return [
        ResultRow(
            variable=str(entry.variable),
            value=float(entry.value),
            mode=str(entry.mode),
            mean_delay_s=float(entry.mean_delay_s),
            min_delay_s=float(entry.min_delay_s),
            max_delay_s=float(entry.max_delay_s),
            mean_iters=float(entry.mean_iters),
            trials=int(entry.trials),
            infeasible_trials=int(entry.infeasible_trials),
        )
        for entry in frame.itertuples(index=False)
    ]


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def rows_to_json(rows: Sequence[ResultRow]) -> str:
    """The CSV rows as a JSON list; NaN becomes null."""
    payload = [{key: _json_safe(value) for key, value in row.to_dict().items()} for row in rows]
    return json.dumps(payload, indent=2) + "\n"
