"""
Solvers module initialization - power, location and bandwidth blocks and the alternating loop
"""

from .special_functions import Branch, lambert_w
from .power import PowerSubproblemInput, energy_ratio, solve_power_single, solve_power_all
from .location import (
    LocationGradient,
    LocationResult,
    delay_term_derivatives,
    location_derivatives,
    solve_location,
)
from .bandwidth import BandwidthBounds, min_bandwidth, clipped_equal_split, solve_bandwidth
from .alternating import (
    BaselineMode,
    IterationRecord,
    SolveTrace,
    initial_decision,
    optimize,
    run_baseline,
    exhaustive_search,
)

__all__ = [
    "Branch",
    "lambert_w",
    "PowerSubproblemInput",
    "energy_ratio",
    "solve_power_single",
    "solve_power_all",
    "LocationGradient",
    "LocationResult",
    "delay_term_derivatives",
    "location_derivatives",
    "solve_location",
    "BandwidthBounds",
    "min_bandwidth",
    "clipped_equal_split",
    "solve_bandwidth",
    "BaselineMode",
    "IterationRecord",
    "SolveTrace",
    "initial_decision",
    "optimize",
    "run_baseline",
    "exhaustive_search",
]
