"""
Configuration settings for the THz UAV delay optimizer
Environment variables (or a local .env file) override every default below
"""

import os
from typing import Dict, Any
from pathlib import Path

from dotenv import load_dotenv

# Base directory for the project
BASE_DIR = Path(__file__).parent

load_dotenv(BASE_DIR / ".env")


# --- Environment-based Configuration ---
def get_env_var(key: str, default: Any = None, required: bool = False) -> Any:
    """Get environment variable with validation."""
    value = os.getenv(key, default)
    if required and value is None:
        raise ValueError(f"Required environment variable {key} is not set")
    return value


def _env_float(key: str, default: float) -> float:
    return float(get_env_var(key, default))


def _env_int(key: str, default: int) -> int:
    return int(get_env_var(key, default))


def _env_grid(key: str, default: list) -> list:
    raw = get_env_var(key)
    if not raw:
        return list(default)
    return [float(item) for item in raw.split(",") if item.strip()]


# --- System Parameters (I/O units: dB, dBm/Hz, Tbits, Hz, W, J, m) ---
REFERENCE_CONFIG = {
    "h0_db": _env_float("H0_DB", -40.0),
    "sigma2_dbm_per_hz": _env_float("SIGMA2_DBM_PER_HZ", -174.0),
    "a_per_m": _env_float("ABSORPTION_PER_M", 0.005),
    "f_hz": _env_float("FREQUENCY_HZ", 1.2e12),
    "uplink_tbits": [10.0, 8.0, 6.0, 4.0],
    "downlink_tbits": [8.0, 6.4, 4.8, 3.2],
    "q_watts": _env_float("UAV_POWER_W", 2.0),
    "B_W_hz": _env_float("TOTAL_BANDWIDTH_HZ", 100e9),
    "Q_joules": _env_float("ENERGY_BUDGET_J", 8.0),
    "P_watts": _env_float("MAX_POWER_W", 0.1),
    "H_m": _env_float("ALTITUDE_M", 20.0),
    "area_side_m": _env_float("AREA_SIDE_M", 50.0),
    "num_users": _env_int("NUM_USERS", 14),
}

# --- Solver Settings ---
SOLVER_CONFIG = {
    "tol": _env_float("SOLVER_TOL", 1e-6),  # relative objective change
    "max_iters": _env_int("SOLVER_MAX_ITERS", 100),
    # log-barrier schedule for the location subproblem
    "barrier_mu_start": 1.0,
    "barrier_mu_end": 1e-8,
    "barrier_mu_factor": 10.0,
    "newton_max_iters": _env_int("NEWTON_MAX_ITERS", 200),
    "gradient_tol": 1e-8,  # s/m
    "armijo_c": 1e-4,
    "armijo_beta": 0.5,
    "min_step": 1e-14,
    "convexity_e_bound": 24.0,
    "tight_energy_rel": 1e-12,
    # bandwidth subproblem
    "bandwidth_min_hz": 1.0,
    "min_bandwidth_rel_tol": 1e-10,
    "bandwidth_sum_rel_tol": 1e-9,
    "dual_max_iters": 200,
    "inner_bisection_iters": 60,
    # power subproblem
    "energy_ratio_margin": 1e-12,
    # Lambert W
    "lambert_max_iters": 50,
}

# --- Feasibility tolerances used by the constraint report ---
TOLERANCE_CONFIG = {
    "bandwidth_rel": 1e-9,
    "power_w": 1e-12,
    "energy_j": 1e-9,
}

# --- Exhaustive search (EXH) ---
EXHAUSTIVE_CONFIG = {
    "grid_step_m": _env_float("EXH_GRID_STEP_M", 0.5),
    "starts": _env_int("EXH_STARTS", 3),
    "chunk_size": _env_int("EXH_CHUNK_SIZE", 4096),
    "fixed_location_rounds": 2,
}

# --- Experiment sweeps ---
EXPERIMENT_CONFIG = {
    "trials": _env_int("SWEEP_TRIALS", 20),
    "seed": _env_int("SWEEP_SEED", 1),
    "grids": {
        "absorption_a": _env_grid(
            "GRID_ABSORPTION", [0.0025, 0.005, 0.0075, 0.01, 0.0125]
        ),
        "total_bandwidth": _env_grid(
            "GRID_BANDWIDTH", [60e9, 80e9, 100e9, 120e9, 140e9]
        ),
        "num_users": _env_grid("GRID_USERS", [4, 8, 12, 16, 20]),
        "altitude": _env_grid("GRID_ALTITUDE", [10.0, 20.0, 30.0]),
    },
    # energy budget Q (J) used as sweep base, per swept variable
    "energy_budget": {
        "absorption_a": 8.0,
        "total_bandwidth": 2.0,
        "num_users": 2.0,
        "altitude": 2.0,
    },
    "csv_columns": [
        "variable",
        "value",
        "mode",
        "mean_delay_s",
        "min_delay_s",
        "max_delay_s",
        "mean_iters",
        "trials",
        "infeasible_trials",
    ],
}

# --- Logging Configuration ---
LOGGING_CONFIG = {
    "level": get_env_var("LOG_LEVEL", "WARNING"),
    "file_path": get_env_var("LOG_FILE", ""),  # empty disables file logging
    "max_size": _env_int("LOG_MAX_SIZE", 10485760),  # 10MB
    "backup_count": _env_int("LOG_BACKUP_COUNT", 5),
    "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    "enable_console": get_env_var("LOG_CONSOLE", "true").lower() == "true",
}

# --- Performance Settings ---
PERFORMANCE_CONFIG = {
    "slow_operation_s": _env_float("SLOW_OPERATION_S", 30.0),
    "max_workers": _env_int("MAX_WORKERS", 1),
    "track_memory": get_env_var("TRACK_MEMORY", "true").lower() == "true",
    "max_metrics": 1000,
}


# --- Validation and Error Handling ---
def validate_config() -> Dict[str, Any]:
    """Validate configuration and return any errors."""
    errors = []
    warnings = []

    if SOLVER_CONFIG["tol"] <= 0:
        errors.append("Solver tolerance must be positive")
    if SOLVER_CONFIG["max_iters"] < 1:
        errors.append("Solver max_iters must be at least 1")
    if SOLVER_CONFIG["barrier_mu_factor"] <= 1:
        errors.append("Barrier decrease factor must be greater than 1")
    if not 0 < SOLVER_CONFIG["armijo_beta"] < 1:
        errors.append("Armijo backtracking factor must lie in (0, 1)")

    for name, value in TOLERANCE_CONFIG.items():
        if value <= 0:
            errors.append(f"Tolerance {name} must be positive")

    for variable, grid in EXPERIMENT_CONFIG["grids"].items():
        if not grid:
            errors.append(f"Sweep grid for {variable} is empty")
        elif any(b <= a for a, b in zip(grid, grid[1:])):
            errors.append(f"Sweep grid for {variable} is not strictly increasing")

    if EXHAUSTIVE_CONFIG["grid_step_m"] <= 0:
        errors.append("EXH grid step must be positive")
    elif EXHAUSTIVE_CONFIG["grid_step_m"] < 0.1:
        warnings.append("EXH grid step below 0.1 m makes exhaustive search very slow")

    if SOLVER_CONFIG["tol"] > 1e-3:
        warnings.append("Solver tolerance above 1e-3 stops the alternating loop early")
    if PERFORMANCE_CONFIG["max_workers"] < 1:
        errors.append("max_workers must be at least 1")

    return {"errors": errors, "warnings": warnings}


def get_config(section: str) -> Dict[str, Any]:
    """Get configuration for a specific section."""
    return get_all_configs().get(section, {})


def get_all_configs() -> Dict[str, Dict[str, Any]]:
    """Get all configuration sections."""
    return {
        "reference": REFERENCE_CONFIG,
        "solver": SOLVER_CONFIG,
        "tolerances": TOLERANCE_CONFIG,
        "exhaustive": EXHAUSTIVE_CONFIG,
        "experiments": EXPERIMENT_CONFIG,
        "logging": LOGGING_CONFIG,
        "performance": PERFORMANCE_CONFIG,
    }
