"""
Alternating optimization of power, UAV location and bandwidth, the
single-block baselines and the exhaustive-search reference.

Each outer iteration solves the power block, then the location block,
then the bandwidth block, each exactly at the other two fixed. Every
block returns a point no worse than its start, so the objective is
nonincreasing along the run.
"""

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from config import get_config
from model.channel import distances, snr_per_watt_hz
from model.objective import constraint_report, total_objective
from model.types import Decision, Scenario
from solvers.bandwidth import (
    bandwidth_bounds,
    clipped_equal_split,
    delay_in_bandwidth,
    solve_bandwidth,
    solve_bandwidth_batch,
)
from solvers.location import solve_location
from solvers.power import closed_form_power, solve_power_all
from utils.error_handling import EnergyInfeasible, InfeasibleInit, OptimizerError, ValidationError
from utils.logging_config import log_debug, log_info, log_solver_event, log_warning
from utils.performance import monitor_performance


class BaselineMode(Enum):
    PROPOSED = "Proposed"
    OL = "OL"
    OP = "OP"
    OW = "OW"
    EXH = "EXH"

    @classmethod
    def parse(cls, value: str) -> "BaselineMode":
        for mode in cls:
            if mode.value.lower() == str(value).lower():
                return mode
        raise ValidationError(
            f"Unknown mode '{value}'", details=f"expected one of {[m.value for m in cls]}"
        )


@dataclass(frozen=True)
class IterationRecord:
    k: int
    objective_s: float
    x: float
    y: float
    max_power_change_W: float
    max_bandwidth_change_Hz: float
    convexity_certificate: bool

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "objective_s": self.objective_s,
            "x": self.x,
            "y": self.y,
            "max_power_change_W": self.max_power_change_W,
            "max_bandwidth_change_Hz": self.max_bandwidth_change_Hz,
            "convexity_certificate": self.convexity_certificate,
        }


@dataclass
class SolveTrace:
    """Per-iteration record of one solve.

    Wall time is kept for logging only: it takes no part in equality and
    is left out of ``to_dict``.
    """

    iterations: List[IterationRecord] = field(default_factory=list)
    converged: bool = False
    total_wall_time_s: float = field(default=0.0, compare=False)

    @property
    def objectives(self) -> List[float]:
        return [record.objective_s for record in self.iterations]

    @property
    def convexity_certificate(self) -> bool:
        return all(record.convexity_certificate for record in self.iterations)

    def is_monotone(self, slack: float = 1e-9) -> bool:
        values = self.objectives
        return all(b <= a + slack for a, b in zip(values, values[1:]))

    def to_dict(self) -> dict:
        return {
            "iterations": [record.to_dict() for record in self.iterations],
            "converged": self.converged,
        }


def _with_iteration(error: OptimizerError, k: int) -> OptimizerError:
    error.details = f"iteration {k}" + (f": {error.details}" if error.details else "")
    return error


def _record(k: int, dec: Decision, prev: Decision, objective: float, certificate: bool) -> IterationRecord:
    return IterationRecord(
        k=k,
        objective_s=objective,
        x=dec.x,
        y=dec.y,
        max_power_change_W=float(np.max(np.abs(dec.p - prev.p))),
        max_bandwidth_change_Hz=float(np.max(np.abs(dec.w - prev.w))),
        convexity_certificate=certificate,
    )


def _check_feasible(s: Scenario, dec: Decision, what: str) -> None:
    report = constraint_report(s, dec)
    if not report.feasible:
        raise InfeasibleInit(
            f"{what} violates the constraints",
            details=(
                f"bandwidth residual {report.bandwidth_residual:.3e}, "
                f"max power excess {float(np.max(report.power_violations)):.3e} W, "
                f"max energy excess {float(np.max(report.energy_violations)):.3e} J"
            ),
        )


def initial_decision(s: Scenario) -> Decision:
    """Start point shared by every mode.

    UAV at the user centroid; bandwidth split equally, raised to the floor
    each user needs at full power; power from the closed form at that state.
    """
    x, y = s.centroid
    try:
        bounds = bandwidth_bounds(s, s.P, x, y)
        if bounds.feasible:
            w = clipped_equal_split(bounds.w_min, s.B_W)
        else:
            log_warning("Energy floors at full power exceed B_W; starting from an equal split")
            w = np.full(s.N, s.B_W / s.N)
    except EnergyInfeasible as e:
        log_warning("Full power infeasible for some users; starting from an equal split", users=e.users)
        w = np.full(s.N, s.B_W / s.N)
    p = solve_power_all(s, x, y, w)
    return Decision(x=x, y=y, p=p, w=w)


@monitor_performance()
def optimize(
    s: Scenario,
    init: Decision,
    tol: Optional[float] = None,
    max_iters: Optional[int] = None,
) -> Tuple[Decision, SolveTrace]:
    """Alternate power, location and bandwidth until the relative objective change is below ``tol``.

    Returns the best iterate and the trace.
    """
    cfg = get_config("solver")
    tol = cfg["tol"] if tol is None else tol
    max_iters = cfg["max_iters"] if max_iters is None else max_iters
    if not tol > 0:
        raise ValidationError("Tolerance must be positive", details=f"tol={tol}")
    if max_iters < 1:
        raise ValidationError("max_iters must be at least 1", details=f"max_iters={max_iters}")

    _check_feasible(s, init, "Initial decision")
    start = time.perf_counter()

    trace = SolveTrace()
    dec = init
    previous_objective = total_objective(s, init)
    best, best_objective = init, previous_objective

    for k in range(1, max_iters + 1):
        block_start = time.perf_counter()
        try:
            p = solve_power_all(s, dec.x, dec.y, dec.w)
            location = solve_location(s, p, dec.w, (dec.x, dec.y))
            w = solve_bandwidth(s, p, location.x, location.y, incumbent=dec.w)
        except OptimizerError as e:
            raise _with_iteration(e, k)

        candidate = Decision(x=location.x, y=location.y, p=p, w=w)
        if not constraint_report(s, candidate).feasible:
            log_warning("Iterate left the feasible set; stopping", iteration=k)
            break

        objective = total_objective(s, candidate)
        trace.iterations.append(_record(k, candidate, dec, objective, location.convexity_certificate))
        log_solver_event("alternating", k, objective, time.perf_counter() - block_start)

        if objective < best_objective:
            best, best_objective = candidate, objective

        dec = candidate
        if abs(previous_objective - objective) <= tol * previous_objective:
            trace.converged = True
            break
        previous_objective = objective

    trace.total_wall_time_s = time.perf_counter() - start
    log_info(
        "Alternating optimization finished",
        iterations=len(trace.iterations),
        converged=trace.converged,
        objective=f"{best_objective:.9g}",
    )
    return best, trace


def _single_block_trace(s: Scenario, dec: Decision, init: Decision, certificate: bool, start: float) -> SolveTrace:
    trace = SolveTrace(converged=True)
    trace.iterations.append(_record(1, dec, init, total_objective(s, dec), certificate))
    trace.total_wall_time_s = time.perf_counter() - start
    return trace


def run_baseline(s: Scenario, mode: BaselineMode, init: Optional[Decision] = None) -> Tuple[Decision, SolveTrace]:
    """Proposed runs the full loop; OL, OP and OW solve their one block once
    with the other blocks held at ``init``; EXH ignores ``init``."""
    mode = BaselineMode(mode)
    if mode is BaselineMode.EXH:
        return exhaustive_search_with_trace(s)
    if init is None:
        init = initial_decision(s)
    if mode is BaselineMode.PROPOSED:
        return optimize(s, init)

    _check_feasible(s, init, "Initial decision")
    start = time.perf_counter()
    certificate = True
    if mode is BaselineMode.OP:
        dec = init.replace(p=solve_power_all(s, init.x, init.y, init.w))
    elif mode is BaselineMode.OL:
        location = solve_location(s, init.p, init.w, (init.x, init.y))
        certificate = location.convexity_certificate
        dec = init.replace(x=location.x, y=location.y)
    else:
        dec = init.replace(w=solve_bandwidth(s, init.p, init.x, init.y, incumbent=init.w))

    log_debug(f"Baseline {mode.value} solved", objective=f"{total_objective(s, dec):.9g}")
    return dec, _single_block_trace(s, dec, init, certificate, start)


def _grid_axis(side: float, step: float) -> np.ndarray:
    count = int(np.floor(side / step + 1e-9))
    axis = np.arange(count + 1) * step
    if axis[-1] < side - 1e-9:
        axis = np.append(axis, side)
    return axis


def _fixed_location_solve(s: Scenario, alpha: np.ndarray, rounds: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Power at equal split, then ``rounds`` of bandwidth followed by power, for rows of alpha."""
    w = np.full(alpha.shape, s.B_W / s.N)
    p, feasible = closed_form_power(alpha / w, s.D / (w * s.Q), s.P)
    ok = feasible.all(axis=-1)
    for _ in range(rounds):
        w_new, _ = solve_bandwidth_batch(s, alpha, np.where(ok[..., None], p, np.nan))
        solved = np.all(np.isfinite(w_new), axis=-1)
        ok = ok & solved
        w = np.where(ok[..., None], w_new, w)
        p_new, feasible = closed_form_power(alpha / w, s.D / (w * s.Q), s.P)
        ok = ok & feasible.all(axis=-1)
        p = np.where(ok[..., None], p_new, p)

    objective = np.full(alpha.shape[:-1], np.inf)
    if ok.any():
        delays = delay_in_bandwidth(w[ok], alpha[ok] * p[ok], alpha[ok] * s.q, s.D, s.E)
        objective[ok] = np.sum(delays, axis=-1)
    return p, w, objective


def _decision_at(s: Scenario, x: float, y: float, rounds: int) -> Optional[Decision]:
    alpha = snr_per_watt_hz(distances(s.positions, x, y, s.H), s.radio)[None, :]
    p, w, objective = _fixed_location_solve(s, alpha, rounds)
    if not np.isfinite(objective[0]):
        return None
    return Decision(x=x, y=y, p=p[0], w=w[0])


def grid_search(s: Scenario, grid_step: float) -> Decision:
    """Best grid point over [0, area_side]^2 with power and bandwidth solved there.

    Infeasible grid points are skipped; ties keep the first point in
    row-major order.
    """
    if not grid_step > 0:
        raise ValidationError("Grid step must be positive", details=f"grid_step={grid_step}")
    cfg = get_config("exhaustive")
    axis = _grid_axis(s.area_side, grid_step)
    gx, gy = np.meshgrid(axis, axis, indexing="xy")
    points = np.column_stack([gx.ravel(), gy.ravel()])

    best_index, best_objective = -1, np.inf
    best_p = best_w = None
    for begin in range(0, len(points), cfg["chunk_size"]):
        chunk = points[begin : begin + cfg["chunk_size"]]
        alpha = snr_per_watt_hz(distances(s.positions, chunk[:, 0], chunk[:, 1], s.H), s.radio)
        p, w, objective = _fixed_location_solve(s, alpha, cfg["fixed_location_rounds"])
        i = int(np.argmin(objective))
        if objective[i] < best_objective:
            best_index, best_objective = begin + i, float(objective[i])
            best_p, best_w = p[i], w[i]

    if best_index < 0:
        raise EnergyInfeasible("No grid point admits a feasible power and bandwidth allocation")
    log_debug("Grid search finished", points=len(points), objective=f"{best_objective:.9g}")
    return Decision(x=points[best_index, 0], y=points[best_index, 1], p=best_p, w=best_w)


@monitor_performance()
def exhaustive_search_with_trace(
    s: Scenario,
    grid_step: Optional[float] = None,
    starts: Optional[int] = None,
) -> Tuple[Decision, SolveTrace]:
    cfg = get_config("exhaustive")
    grid_step = cfg["grid_step_m"] if grid_step is None else grid_step
    starts = cfg["starts"] if starts is None else starts
    if starts < 0:
        raise ValidationError("Number of polish starts must be nonnegative", details=f"starts={starts}")
    start = time.perf_counter()

    grid_best = grid_search(s, grid_step)
    rng = np.random.default_rng(0 if s.seed is None else s.seed)
    inits = [grid_best]
    for _ in range(starts):
        x, y = np.clip(
            np.array([grid_best.x, grid_best.y]) + rng.uniform(-grid_step, grid_step, size=2),
            0.0,
            s.area_side,
        )
        perturbed = _decision_at(s, float(x), float(y), cfg["fixed_location_rounds"])
        if perturbed is not None and constraint_report(s, perturbed).feasible:
            inits.append(perturbed)

    best = grid_best
    best_objective = total_objective(s, grid_best)
    best_trace = _single_block_trace(s, grid_best, grid_best, True, start)
    for init in inits:
        if not constraint_report(s, init).feasible:
            continue
        dec, trace = optimize(s, init)
        objective = total_objective(s, dec)
        if objective < best_objective:
            best, best_objective, best_trace = dec, objective, trace

    best_trace.total_wall_time_s = time.perf_counter() - start
    log_info("Exhaustive search finished", starts=len(inits), objective=f"{best_objective:.9g}")
    return best, best_trace


def exhaustive_search(
    s: Scenario, grid_step: Optional[float] = None, starts: Optional[int] = None
) -> Decision:
    """Grid search over UAV placements polished by alternating optimization."""
    return exhaustive_search_with_trace(s, grid_step, starts)[0]
