"""
Command-line driver.

Subcommands:
    gen      emit a scenario as JSON
    solve    solve one scenario in one mode, print decision and trace
    compare  solve one scenario in every mode from a shared start
    sweep    run a parameter sweep and write CSV or JSON rows
    verify   run the convexity audit

Machine-readable output goes to stdout (or --out); logs go to stderr.
Exit codes: 0 success, 1 infeasible (or a failed audit), 2 bad input.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from audit.verifier import run_audit
from config import get_config, validate_config
from experiments.sweeps import SweepSpec, SweepVariable, max_reductions, rows_to_csv, rows_to_json, run_sweep
from model.objective import constraint_report, total_objective
from model.scenario import dumps_scenario, generate_scenario, load_scenario, scenario_from_dict, scenario_to_dict
from model.types import Scenario
from solvers.alternating import BaselineMode, initial_decision, optimize, run_baseline
from utils.error_handling import EXIT_BAD_INPUT, EXIT_INFEASIBLE, EXIT_OK, ValidationError, handle_errors
from utils.logging_config import log_audit, log_error, log_info, log_warning, set_log_level

MODE_CHOICES = ("proposed", "ol", "op", "ow", "exh", "all")

# flag dest -> generation override key
SCENARIO_FLAGS = {
    "area": "area_side_m",
    "altitude": "H_m",
    "absorption": "a_per_m",
    "bandwidth": "B_W_hz",
    "energy": "Q_joules",
    "max_power": "P_watts",
    "uav_power": "q_watts",
}


def _add_scenario_arguments(parser: argparse.ArgumentParser, with_file: bool = True) -> None:
    table = get_config("reference")
    if with_file:
        parser.add_argument("--scenario", type=Path, help="Scenario JSON file; overrides --seed/--users")
    parser.add_argument("--seed", type=int, default=0, help="Seed of the user layout")
    parser.add_argument("--users", type=int, default=table["num_users"], help="Number of users")
    parser.add_argument("--area", type=float, help="Side of the square service area (m)")
    parser.add_argument("--altitude", type=float, help="UAV altitude H (m)")
    parser.add_argument("--absorption", type=float, help="Molecular absorption coefficient a (1/m)")
    parser.add_argument("--bandwidth", type=float, help="Total bandwidth B_W (Hz)")
    parser.add_argument("--energy", type=float, help="Per-user energy budget Q (J)")
    parser.add_argument("--max-power", type=float, help="Per-user power limit P (W)")
    parser.add_argument("--uav-power", type=float, help="UAV downlink power q (W)")


def _add_solver_arguments(parser: argparse.ArgumentParser) -> None:
    solver = get_config("solver")
    parser.add_argument("--tol", type=float, default=solver["tol"], help="Relative objective change to stop at")
    parser.add_argument("--max-iters", type=int, default=solver["max_iters"], help="Alternating iteration cap")


def _add_output_arguments(parser: argparse.ArgumentParser, formats: Sequence[str] = ("json",)) -> None:
    parser.add_argument("--out", type=Path, help="Output file (default: stdout)")
    parser.add_argument("--format", choices=formats, default=formats[0], help="Output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="run_experiments.py",
        description="Delay minimization for THz UAV uplink/downlink networks",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--verbose", "-v", action="count", default=0, help="-v for INFO, -vv for DEBUG logs")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Generate a scenario", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_scenario_arguments(gen, with_file=False)
    gen.add_argument("--out", type=Path, help="Output file (default: stdout)")

    solve = sub.add_parser("solve", help="Solve one scenario", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_scenario_arguments(solve)
    _add_solver_arguments(solve)
    solve.add_argument("--mode", choices=MODE_CHOICES[:-1], default="proposed", help="Algorithm")
    _add_output_arguments(solve)

    compare = sub.add_parser(
        "compare", help="Solve one scenario in every mode", formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    _add_scenario_arguments(compare)
    _add_solver_arguments(compare)
    compare.add_argument("--mode", choices=MODE_CHOICES, default="all", help="Modes to compare")
    _add_output_arguments(compare, ("json", "csv"))

    sweep = sub.add_parser("sweep", help="Run a parameter sweep", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sweep.add_argument(
        "--variable", required=True, choices=[v.value for v in SweepVariable], help="Swept parameter"
    )
    sweep.add_argument("--values", type=str, help="Comma-separated sweep values (default: config grid)")
    sweep.add_argument("--trials", type=int, default=get_config("experiments")["trials"], help="Layouts per value")
    _add_scenario_arguments(sweep)
    sweep.set_defaults(seed=get_config("experiments")["seed"])
    sweep.add_argument(
        "--mode", choices=MODE_CHOICES, default="all", help="Modes to run (all = Proposed, OL, OP, OW)"
    )
    sweep.add_argument("--workers", type=int, default=get_config("performance")["max_workers"], help="Worker processes")
    sweep.add_argument("--progress", action="store_true", help="Progress bar on stderr")
    _add_output_arguments(sweep, ("csv", "json"))

    verify = sub.add_parser(
        "verify", help="Numerically audit location convexity", formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    verify.add_argument("--samples", type=int, default=10000, help="Random instances per determinant audit")
    verify.add_argument("--seed", type=int, default=0, help="Audit seed")
    verify.add_argument("--out", type=Path, help="Output file for the JSON report (default: stdout)")

    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {key: getattr(args, dest) for dest, key in SCENARIO_FLAGS.items() if getattr(args, dest) is not None}


def _apply_to_loaded(s: Scenario, overrides: Dict[str, Any]) -> Scenario:
    """Flags given alongside --scenario replace the matching fields of the file."""
    if not overrides:
        return s
    data = scenario_to_dict(s)
    for key, value in overrides.items():
        if key == "a_per_m":
            data["radio"]["a_per_m"] = value
        elif key == "Q_joules":
            for user in data["users"]:
                user["Q_joules"] = value
        else:
            data[key] = value
    return scenario_from_dict(data)


def _scenario(args: argparse.Namespace) -> Scenario:
    overrides = _overrides(args)
    if getattr(args, "scenario", None) is not None:
        return _apply_to_loaded(load_scenario(args.scenario), overrides)
    return generate_scenario(args.seed, args.users, overrides)


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _modes(choice: str, include_exh: bool) -> List[BaselineMode]:
    if choice != "all":
        return [BaselineMode.parse(choice)]
    modes = [BaselineMode.PROPOSED, BaselineMode.OL, BaselineMode.OP, BaselineMode.OW]
    return modes + [BaselineMode.EXH] if include_exh else modes


def _solve_mode(s: Scenario, mode: BaselineMode, args: argparse.Namespace, init=None):
    if mode is BaselineMode.EXH:
        return run_baseline(s, mode, init)
    init = initial_decision(s) if init is None else init
    if mode is BaselineMode.PROPOSED:
        return optimize(s, init, tol=args.tol, max_iters=args.max_iters)
    return run_baseline(s, mode, init)


def cmd_gen(args: argparse.Namespace) -> int:
    s = generate_scenario(args.seed, args.users, _overrides(args))
    _emit(dumps_scenario(s), args.out)
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    s = _scenario(args)
    mode = BaselineMode.parse(args.mode)
    dec, trace = _solve_mode(s, mode, args)
    payload = {
        "mode": mode.value,
        "objective_s": total_objective(s, dec),
        "decision": dec.to_dict(),
        "constraints": constraint_report(s, dec).to_dict(),
        "trace": trace.to_dict(),
    }
    _emit(_dumps(payload), args.out)
    log_info("Solve finished", mode=mode.value, objective=f"{payload['objective_s']:.9g}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    s = _scenario(args)
    init = initial_decision(s)
    results = []
    for mode in _modes(args.mode, include_exh=True):
        dec, trace = _solve_mode(s, mode, args, init)
        results.append(
            {"mode": mode.value, "objective_s": total_objective(s, dec), "iterations": len(trace.iterations)}
        )

    proposed = next((r["objective_s"] for r in results if r["mode"] == BaselineMode.PROPOSED.value), None)
    for row in results:
        row["gap_to_proposed"] = None if proposed is None else (row["objective_s"] - proposed) / proposed

    if args.format == "csv":
        frame = pd.DataFrame(results, columns=["mode", "objective_s", "iterations", "gap_to_proposed"])
        _emit(frame.to_csv(index=False, lineterminator="\n"), args.out)
    else:
        _emit(_dumps(results), args.out)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    variable = SweepVariable(args.variable)
    if args.scenario is not None:
        # the file fixes every constant but the swept one; layouts are redrawn per trial
        base = _scenario(args)
    else:
        overrides = _overrides(args)
        overrides.setdefault("Q_joules", variable.energy_budget)
        base = generate_scenario(args.seed, args.users, overrides)

    modes = _modes(args.mode, include_exh=False)
    if args.values:
        try:
            values = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError as e:
            raise ValidationError("Sweep values must be numbers", details=args.values) from e
        spec = SweepSpec(variable=variable, values=tuple(values), trials=args.trials, modes=tuple(modes))
    else:
        spec = SweepSpec.default(variable, trials=args.trials, modes=modes)

    rows = run_sweep(spec, base, args.seed, workers=args.workers, progress=args.progress)
    if BaselineMode.PROPOSED in spec.modes and len(spec.modes) > 1:
        max_reductions(rows)
    _emit(rows_to_csv(rows) if args.format == "csv" else rows_to_json(rows), args.out)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    if args.samples < 1:
        raise ValidationError("Audit needs at least one sample", details=f"samples={args.samples}")
    report = run_audit(samples=args.samples, seed=args.seed)
    _emit(_dumps(report.to_dict()), args.out)
    sys.stderr.write(report.summary() + "\n")
    return EXIT_OK if report.overall_pass else EXIT_INFEASIBLE


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


@handle_errors(error_message="Command failed")
def _dispatch(args: argparse.Namespace) -> int:
    return COMMANDS[args.command](args)


def _config_ok() -> bool:
    result = validate_config()
    for warning in result["warnings"]:
        log_warning("Configuration warning", detail=warning)
    for error in result["errors"]:
        log_error("Configuration error", detail=error)
    return not result["errors"]


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv`` and run the subcommand; returns the exit code."""
    if not _config_ok():
        return EXIT_BAD_INPUT
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_BAD_INPUT

    if args.verbose:
        set_log_level("DEBUG" if args.verbose > 1 else "INFO")
    log_audit(f"command {args.command}", details=" ".join(argv if argv is not None else sys.argv[1:]))
    code = _dispatch(args)
    log_audit(f"command {args.command} finished", details=f"exit code {code}")
    return code
