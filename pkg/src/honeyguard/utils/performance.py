"""
Performance monitoring utilities
"""

import statistics
import threading
import time
from collections import defaultdict, deque
from typing import Any, Dict, List, Optional

from ..core.logger import logger


class PerformanceMonitor:
    """Named duration samples with summary statistics"""

    def __init__(self, history_size: int = 10000):
        self.history_size = history_size
        self.operation_metrics: Dict[str, deque] = defaultdict(lambda: deque(maxlen=history_size))
        self._lock = threading.Lock()

    def log_operation(self, operation: str, duration: float, **kwargs) -> None:
        """Record one duration sample"""
        with self._lock:
            self.operation_metrics[operation].append({'duration': duration, **kwargs})
        logger.log_performance(operation, duration, **kwargs)

    def durations(self, operation: str) -> List[float]:
        with self._lock:
            return [m['duration'] for m in self.operation_metrics.get(operation, ())]

    def get_operation_stats(self, operation: str) -> Dict[str, Any]:
        """count, mean, variance (population), median, min, max and total for one operation"""
        durations = self.durations(operation)
        if not durations:
            return {'operation': operation, 'count': 0}
        return {
            'operation': operation,
            'count': len(durations),
            'mean': statistics.fmean(durations),
            'variance': statistics.pvariance(durations),
            'median': statistics.median(durations),
            'min': min(durations),
            'max': max(durations),
            'total': sum(durations),
        }

    def get_performance_summary(self) -> Dict[str, Any]:
        with self._lock:
            operations = list(self.operation_metrics.keys())
        summary = {op: self.get_operation_stats(op) for op in operations}
        return {
            'operations': summary,
            'total_operations': sum(s['count'] for s in summary.values()),
        }

    def reset_metrics(self) -> None:
        with self._lock:
            self.operation_metrics.clear()
        logger.debug("Performance metrics reset")


class OperationTimer:
    """Context manager for timing operations

    The elapsed time is available as `duration` after the block exits; it is
    also recorded on `monitor` when one is given.
    """

    def __init__(self, operation_name: str, monitor: Optional[PerformanceMonitor] = None,
                 **kwargs):
        self.operation_name = operation_name
        self.monitor = monitor
        self.kwargs = kwargs
        self.start_time: Optional[float] = None
        self.duration: float = 0.0

    def __enter__(self) -> "OperationTimer":
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.duration = time.perf_counter() - self.start_time
        if self.monitor is not None and exc_type is None:
            self.monitor.log_operation(self.operation_name, self.duration, **self.kwargs)
        return False  # Don't suppress exceptions
