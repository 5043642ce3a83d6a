import time

import numpy as np
import pytest

from conftest import build_scenario
from model.objective import constraint_report, total_objective
from model.scenario import generate_scenario
from model.types import Decision
from solvers.alternating import (
    BaselineMode,
    exhaustive_search,
    exhaustive_search_with_trace,
    grid_search,
    initial_decision,
    optimize,
    run_baseline,
)
from solvers.power import solve_power_all
from utils.error_handling import InfeasibleInit, ValidationError


@pytest.fixture
def solved(reference_scenario):
    init = initial_decision(reference_scenario)
    dec, trace = optimize(reference_scenario, init)
    return init, dec, trace


def test_initial_decision_is_feasible(reference_scenario):
    s = reference_scenario
    init = initial_decision(s)
    assert constraint_report(s, init).feasible
    assert (init.x, init.y) == pytest.approx(s.centroid)


def test_objective_never_increases(reference_scenario, solved):
    init, dec, trace = solved
    start = total_objective(reference_scenario, init)
    assert trace.iterations
    assert trace.objectives[0] <= start * (1.0 + 1e-12)
    assert trace.is_monotone(slack=1e-9 * start)


def test_converges_to_feasible_best_iterate(reference_scenario, solved):
    _, dec, trace = solved
    assert trace.converged
    assert constraint_report(reference_scenario, dec).feasible
    assert total_objective(reference_scenario, dec) == pytest.approx(min(trace.objectives), rel=1e-12)
    assert [record.k for record in trace.iterations] == list(range(1, len(trace.iterations) + 1))


def test_runs_are_deterministic(reference_scenario, solved):
    _, dec, trace = solved
    again, trace_again = optimize(reference_scenario, initial_decision(reference_scenario))
    assert dec.same_as(again)
    assert trace == trace_again
    assert trace.to_dict() == trace_again.to_dict()


def test_iteration_cap(small_scenario):
    _, trace = optimize(small_scenario, initial_decision(small_scenario), max_iters=1)
    assert len(trace.iterations) == 1


def test_rejects_bad_settings(small_scenario):
    init = initial_decision(small_scenario)
    with pytest.raises(ValidationError):
        optimize(small_scenario, init, tol=0.0)
    with pytest.raises(ValidationError):
        optimize(small_scenario, init, max_iters=0)


def test_infeasible_start(small_scenario):
    s = small_scenario
    init = initial_decision(s)
    short = init.replace(w=init.w * 0.5)
    with pytest.raises(InfeasibleInit):
        optimize(s, short)
    with pytest.raises(InfeasibleInit):
        run_baseline(s, BaselineMode.OL, short)


def test_proposed_beats_single_block_baselines(reference_scenario, solved):
    s = reference_scenario
    init, dec, _ = solved
    proposed = total_objective(s, dec)
    results = {mode: total_objective(s, run_baseline(s, mode, init)[0]) for mode in (BaselineMode.OP, BaselineMode.OL, BaselineMode.OW)}

    for mode, value in results.items():
        assert proposed <= value * (1.0 + 1e-9), mode
    for value in results.values():
        assert value <= total_objective(s, init) * (1.0 + 1e-12)


def test_single_block_baselines_touch_one_block(small_scenario):
    s = small_scenario
    init = initial_decision(s)
    op, _ = run_baseline(s, BaselineMode.OP, init)
    ol, _ = run_baseline(s, "OL", init)
    ow, trace = run_baseline(s, BaselineMode.OW, init)

    assert (op.x, op.y) == (init.x, init.y) and np.array_equal(op.w, init.w)
    assert np.array_equal(ol.p, init.p) and np.array_equal(ol.w, init.w)
    assert (ow.x, ow.y) == (init.x, init.y) and np.array_equal(ow.p, init.p)
    assert trace.converged and len(trace.iterations) == 1


def test_mode_parsing():
    assert BaselineMode.parse("ow") is BaselineMode.OW
    assert BaselineMode.parse("Proposed") is BaselineMode.PROPOSED
    assert BaselineMode.parse("exh") is BaselineMode.EXH
    with pytest.raises(ValidationError):
        BaselineMode.parse("greedy")


@pytest.mark.slow
def test_finer_grid_is_no_worse(small_scenario):
    s = small_scenario
    coarse = grid_search(s, 2.0)
    fine = grid_search(s, 0.5)
    assert total_objective(s, fine) <= total_objective(s, coarse)
    assert constraint_report(s, fine).feasible


@pytest.mark.slow
def test_exhaustive_search_polishes_grid_best(small_scenario):
    s = small_scenario
    grid_best = grid_search(s, 5.0)
    dec, trace = exhaustive_search_with_trace(s, grid_step=5.0, starts=1)
    assert total_objective(s, dec) <= total_objective(s, grid_best)
    assert constraint_report(s, dec).feasible
    assert trace.iterations


def test_grid_search_rejects_bad_step(small_scenario):
    with pytest.raises(ValidationError):
        grid_search(small_scenario, 0.0)


def test_decision_from_baseline_is_a_decision(small_scenario):
    dec, _ = run_baseline(small_scenario, BaselineMode.PROPOSED)
    assert isinstance(dec, Decision)
    assert dec.p.shape == (small_scenario.N,)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_close_to_exhaustive_search(seed):
    s = generate_scenario(seed, 2 + seed % 5)
    proposed, _ = optimize(s, initial_decision(s))
    exhaustive = exhaustive_search(s, grid_step=0.5)
    assert total_objective(s, proposed) <= total_objective(s, exhaustive) * 1.02


def _check_reference_run(seed: int) -> None:
    s = generate_scenario(seed, 14)
    init = initial_decision(s)
    dec, trace = optimize(s, init)
    start = total_objective(s, init)

    assert trace.converged and len(trace.iterations) <= 100
    assert trace.is_monotone(slack=1e-9 * start)
    assert constraint_report(s, dec).feasible
    assert abs(np.sum(dec.w) - s.B_W) <= 1e-9 * s.B_W

    proposed = total_objective(s, dec)
    for mode in (BaselineMode.OP, BaselineMode.OL, BaselineMode.OW):
        baseline, _ = run_baseline(s, mode, init)
        assert proposed <= total_objective(s, baseline) * (1.0 + 1e-9), mode


# after the power step the energy floors on these layouts sum to B_W plus rounding
@pytest.mark.parametrize("seed", [0, 3, 4])
def test_energy_tight_layouts_run_to_convergence(seed):
    _check_reference_run(seed)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(100))
def test_reference_layouts_descend_and_dominate(seed):
    _check_reference_run(seed)


def test_single_user_overhead_is_a_fixed_point():
    s = build_scenario([(12.0, 31.0)])
    w = np.array([s.B_W])
    init = Decision(x=12.0, y=31.0, p=solve_power_all(s, 12.0, 31.0, w), w=w)
    dec, trace = optimize(s, init)

    assert trace.converged and len(trace.iterations) <= 2
    assert (dec.x, dec.y) == pytest.approx((12.0, 31.0), abs=1e-6)
    for record in trace.iterations:
        assert record.max_power_change_W <= 1e-12
        assert record.max_bandwidth_change_Hz <= 1e-9 * s.B_W
    assert total_objective(s, dec) <= total_objective(s, init) * (1.0 + 1e-12)


def test_grid_search_single_user_picks_nearest_point():
    s = build_scenario([(10.3, 20.7)])
    dec = grid_search(s, 2.0)
    assert (dec.x, dec.y) == (10.0, 20.0)


@pytest.mark.slow
def test_iteration_cost_grows_linearly_in_users():
    per_iteration = {}
    for n in (4, 8, 16, 32, 64):
        s = generate_scenario(1, n)
        init = initial_decision(s)
        best = np.inf
        for _ in range(3):
            begin = time.perf_counter()
            _, trace = optimize(s, init, max_iters=3)
            best = min(best, (time.perf_counter() - begin) / len(trace.iterations))
        per_iteration[n] = best

    # 8x the users, well under the 64x a quadratic step would cost
    assert per_iteration[64] <= 32.0 * per_iteration[8]
