"""
Model module initialization - domain types, channel kernels, objective and scenarios
"""

from .types import (
    RadioConstants,
    UserSpec,
    Scenario,
    Decision,
    LinkDerived,
    ConstraintReport,
)

from .channel import (
    distance,
    channel_gain,
    snr_coefficient,
    uplink_rate,
    downlink_rate,
    uplink_delay,
    downlink_delay,
)

from .objective import derive_links, total_objective, constraint_report

from .scenario import (
    generate_scenario,
    scenario_overrides,
    dumps_scenario,
    loads_scenario,
    save_scenario,
    load_scenario,
)

__all__ = [
    # Types
    "RadioConstants",
    "UserSpec",
    "Scenario",
    "Decision",
    "LinkDerived",
    "ConstraintReport",
    # Channel
    "distance",
    "channel_gain",
    "snr_coefficient",
    "uplink_rate",
    "downlink_rate",
    "uplink_delay",
    "downlink_delay",
    # Objective
    "derive_links",
    "total_objective",
    "constraint_report",
    # Scenarios
    "generate_scenario",
    "scenario_overrides",
    "dumps_scenario",
    "loads_scenario",
    "save_scenario",
    "load_scenario",
]
