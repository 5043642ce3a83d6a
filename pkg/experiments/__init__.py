"""
Experiments module initialization - parameter sweeps and the command-line driver
"""

from .sweeps import (
    SweepVariable,
    SweepSpec,
    ResultRow,
    run_sweep,
    max_reductions,
    rows_to_csv,
    read_rows_csv,
    rows_to_json,
)

__all__ = [
    "SweepVariable",
    "SweepSpec",
    "ResultRow",
    "run_sweep",
    "max_reductions",
    "rows_to_csv",
    "read_rows_csv",
    "rows_to_json",
]
