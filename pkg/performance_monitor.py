"""
performance_monitor.py
Wall-time and memory accounting for experiments and acceptance checks
"""

import functools
import logging
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional

import psutil

from config import Config

logger = logging.getLogger(__name__)


@dataclass
class PerformanceMetrics:
    """Performance metrics for one timed operation"""
    operation: str
    wall_seconds: float
    rss_mb: float
    failed: bool = False


class PerformanceMonitor:
    """Record per-operation timings and process memory"""

    def __init__(self):
        self.metrics_history: List[PerformanceMetrics] = []
        self.start_time = time.perf_counter()
        self.total_errors = 0
        self._process = psutil.Process()

    def current_rss_mb(self) -> float:
        try:
            return self._process.memory_info().rss / (1024 * 1024)
        except Exception as e:
            logger.error(f"Error reading process memory: {e}")
            return 0.0

    def record(self, operation: str, start_time: float, failed: bool = False) -> PerformanceMetrics:
        """Record the wall time of an operation started at start_time (perf_counter)"""
        metrics = PerformanceMetrics(
            operation=operation,
            wall_seconds=time.perf_counter() - start_time,
            rss_mb=self.current_rss_mb(),
            failed=failed,
        )
        self.metrics_history.append(metrics)
        if failed:
            self.total_errors += 1

        # Keep only recent metrics
        if len(self.metrics_history) > 1000:
            self.metrics_history = self.metrics_history[-500:]

        logger.info(f"{operation}: {metrics.wall_seconds:.3f}s, rss {metrics.rss_mb:.1f} MB")
        return metrics

    def timings(self) -> Dict[str, float]:
        totals: Dict[str, float] = {}
        for m in self.metrics_history:
            totals[m.operation] = totals.get(m.operation, 0.0) + m.wall_seconds
        return totals

    def over_budget(self, budgets: Optional[Dict[str, float]] = None) -> List[str]:
        """Operations whose total wall time exceeds their budget"""
        budgets = budgets if budgets is not None else Config.CHECK_BUDGETS
        slow = []
        for operation, seconds in self.timings().items():
            budget = budgets.get(operation)
            if budget is not None and seconds > budget:
                slow.append(f"{operation} took {seconds:.2f}s (budget {budget:.0f}s)")
        return slow

    def get_performance_summary(self) -> Dict[str, Any]:
        """Get performance summary"""
        if not self.metrics_history:
            return {"status": "No metrics available"}

        return {
            "runtime_seconds": round(time.perf_counter() - self.start_time, 3),
            "operations": len(self.metrics_history),
            "total_errors": self.total_errors,
            "peak_rss_mb": round(max(m.rss_mb for m in self.metrics_history), 1),
            "timings": {k: round(v, 3) for k, v in self.timings().items()},
            "over_budget": self.over_budget(),
        }

    def reset(self):
        self.metrics_history.clear()
        self.total_errors = 0
        self.start_time = time.perf_counter()


# Global performance monitor instance
performance_monitor = PerformanceMonitor()


def monitor_performance(operation: str, monitor: Optional[PerformanceMonitor] = None) -> Callable:
    """Decorator that records the wall time of each call under operation"""
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            target = monitor or performance_monitor
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception:
                target.record(operation, start_time, failed=True)
                raise
            target.record(operation, start_time)
            return result
        return wrapper
    return decorator
