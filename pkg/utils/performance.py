"""
Performance monitoring utilities
"""

import functools
import threading
import time
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional

import psutil

from config import get_config
from utils.logging_config import log_debug, log_warning


@dataclass
class PerformanceMetric:
    """Performance metric data structure."""

    function_name: str
    execution_time: float
    timestamp: datetime
    memory_usage: float
    parameters: Optional[Dict] = None


class PerformanceMonitor:
    """Monitor and track solver performance."""

    def __init__(self):
        config = get_config("performance")
        self.metrics: List[PerformanceMetric] = []
        self.slow_operations: List[PerformanceMetric] = []
        self.threshold_slow_operation = config["slow_operation_s"]
        self.max_metrics = config["max_metrics"]
        self._lock = threading.Lock()

    def record_metric(self, metric: PerformanceMetric) -> None:
        """Record a performance metric."""
        with self._lock:
            self.metrics.append(metric)

            if metric.execution_time > self.threshold_slow_operation:
                self.slow_operations.append(metric)
                log_warning(
                    f"Slow operation detected: {metric.function_name}",
                    duration=f"{metric.execution_time:.2f}s",
                    memory=f"{metric.memory_usage:.1f}MB",
                )

            if len(self.metrics) > self.max_metrics:
                self.metrics = self.metrics[-self.max_metrics :]
            if len(self.slow_operations) > 100:
                self.slow_operations = self.slow_operations[-100:]

    def get_performance_summary(self) -> Dict[str, Any]:
        """Get performance summary statistics."""
        with self._lock:
            metrics = list(self.metrics)

        if not metrics:
            return {}

        execution_times = [m.execution_time for m in metrics]
        memory_usage = [m.memory_usage for m in metrics]

        return {
            "total_operations": len(metrics),
            "avg_execution_time": sum(execution_times) / len(execution_times),
            "max_execution_time": max(execution_times),
            "min_execution_time": min(execution_times),
            "avg_memory_usage": sum(memory_usage) / len(memory_usage),
            "slow_operations_count": len(
                [m for m in metrics if m.execution_time > self.threshold_slow_operation]
            ),
            "operations_by_function": self._get_operations_by_function(metrics),
        }

    def _get_operations_by_function(
        self, metrics: List[PerformanceMetric]
    ) -> Dict[str, int]:
        """Group operations by function name."""
        operations: Dict[str, int] = {}
        for metric in metrics:
            operations[metric.function_name] = operations.get(metric.function_name, 0) + 1
        return operations

    def clear(self) -> None:
        with self._lock:
            self.metrics = []
            self.slow_operations = []


# Global performance monitor
performance_monitor = PerformanceMonitor()


def _resident_mb() -> float:
    return psutil.Process().memory_info().rss / 1024 / 1024


def monitor_performance(
    track_memory: Optional[bool] = None,
    include_parameters: bool = False,
):
    """Decorator to monitor function performance."""
    if track_memory is None:
        track_memory = get_config("performance")["track_memory"]

    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            start_memory = _resident_mb() if track_memory else 0.0

            try:
                result = func(*args, **kwargs)
            except Exception:
                # Still record the metric even if function fails
                performance_monitor.record_metric(
                    PerformanceMetric(
                        function_name=f"{func.__name__}_FAILED",
                        execution_time=time.perf_counter() - start_time,
                        timestamp=datetime.now(),
                        memory_usage=0.0,
                    )
                )
                raise

            execution_time = time.perf_counter() - start_time
            memory_delta = _resident_mb() - start_memory if track_memory else 0.0

            performance_monitor.record_metric(
                PerformanceMetric(
                    function_name=func.__name__,
                    execution_time=execution_time,
                    timestamp=datetime.now(),
                    memory_usage=memory_delta,
                    parameters=kwargs if include_parameters else None,
                )
            )
            log_debug(f"{func.__name__} finished", duration=f"{execution_time:.3f}s")

            return result

        return wrapper

    return decorator


def get_system_metrics() -> Dict[str, Any]:
    """Get current system performance metrics."""
    try:
        process = psutil.Process()

        return {
            "cpu_count": psutil.cpu_count(),
            "memory_percent": psutil.virtual_memory().percent,
            "process_memory_mb": process.memory_info().rss / 1024 / 1024,
            "load_average": (
                psutil.getloadavg() if hasattr(psutil, "getloadavg") else None
            ),
        }
    except Exception as e:
        log_warning(f"Failed to get system metrics: {e}")
        return {}
