"""
Utils module initialization - logging, error handling and performance monitoring
"""

from .logging_config import (
    SolverLogger,
    log_info,
    log_warning,
    log_error,
    log_debug,
    log_audit,
    log_solver_event,
    set_log_level,
)

from .error_handling import (
    OptimizerError,
    ValidationError,
    DomainError,
    ScenarioFormatError,
    EnergyInfeasible,
    InfeasibleInit,
    LineSearchStall,
    EXIT_OK,
    EXIT_INFEASIBLE,
    EXIT_BAD_INPUT,
    exit_code_for,
    handle_errors,
    error_tracker,
    safe_execute,
)

from .performance import (
    PerformanceMonitor,
    monitor_performance,
    performance_monitor,
    get_system_metrics,
)

__all__ = [
    # Logging
    "SolverLogger",
    "log_info",
    "log_warning",
    "log_error",
    "log_debug",
    "log_audit",
    "log_solver_event",
    "set_log_level",
    # Error Handling
    "OptimizerError",
    "ValidationError",
    "DomainError",
    "ScenarioFormatError",
    "EnergyInfeasible",
    "InfeasibleInit",
    "LineSearchStall",
    "EXIT_OK",
    "EXIT_INFEASIBLE",
    "EXIT_BAD_INPUT",
    "exit_code_for",
    "handle_errors",
    "error_tracker",
    "safe_execute",
    # Performance
    "PerformanceMonitor",
    "monitor_performance",
    "performance_monitor",
    "get_system_metrics",
]
