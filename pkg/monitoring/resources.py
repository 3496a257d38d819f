"""
Resource usage monitoring for analysis runs.
"""
import logging
import threading
import time
from dataclasses import dataclass
from typing import Optional

try:
    import psutil
    PSUTIL_AVAILABLE = True
except ImportError:
    PSUTIL_AVAILABLE = False

logger = logging.getLogger(__name__)


@dataclass
class ResourceUsage:
    """Resource usage metrics."""
    execution_time_seconds: float = 0.0
    peak_memory_mb: float = 0.0
    avg_memory_mb: float = 0.0
    integrations: int = 0
    accepted_steps: int = 0
    rejected_steps: int = 0
    field_evaluations: int = 0

    def to_dict(self) -> dict:
        """Convert to dictionary."""
        return {
            "execution_time_seconds": round(self.execution_time_seconds, 4),
            "peak_memory_mb": round(self.peak_memory_mb, 2),
            "avg_memory_mb": round(self.avg_memory_mb, 2),
            "integrations": self.integrations,
            "accepted_steps": self.accepted_steps,
            "rejected_steps": self.rejected_steps,
            "field_evaluations": self.field_evaluations,
        }

    def format_summary(self) -> str:
        """Format as human-readable summary."""
        return (
            f"Execution time: {self.execution_time_seconds:.2f}s\n"
            f"Peak memory: {self.peak_memory_mb:.1f}MB\n"
            f"Integrations: {self.integrations:,} "
            f"({self.accepted_steps:,} accepted / {self.rejected_steps:,} rejected steps)\n"
            f"Vector field evaluations: {self.field_evaluations:,}"
        )


class ResourceMonitor:
    """Monitor wall time, memory and integrator work during a command."""

    def __init__(self):
        self._start_time: Optional[float] = None
        self._memory_samples: list[float] = []
        self._integrations = 0
        self._accepted = 0
        self._rejected = 0
        self._evaluations = 0
        self._lock = threading.Lock()
        self._process = psutil.Process() if PSUTIL_AVAILABLE else None

    def start(self) -> None:
        """Start monitoring."""
        with self._lock:
            self._start_time = time.time()
            self._memory_samples = []
            self._integrations = 0
            self._accepted = 0
            self._rejected = 0
            self._evaluations = 0
        self._sample_memory()
        logger.debug("Resource monitoring started")

    def stop(self) -> ResourceUsage:
        """
        Stop monitoring and return usage.

        Returns:
            ResourceUsage with collected metrics
        """
        if self._start_time is None:
            return ResourceUsage()

        execution_time = time.time() - self._start_time
        self._sample_memory()

        with self._lock:
            samples = list(self._memory_samples)
            usage = ResourceUsage(
                execution_time_seconds=execution_time,
                peak_memory_mb=max(samples) if samples else 0.0,
                avg_memory_mb=sum(samples) / len(samples) if samples else 0.0,
                integrations=self._integrations,
                accepted_steps=self._accepted,
                rejected_steps=self._rejected,
                field_evaluations=self._evaluations,
            )
        logger.debug(f"Resource monitoring stopped: {usage.to_dict()}")
        return usage

    def _sample_memory(self) -> None:
        """Take a memory sample."""
        if self._process:
            try:
                memory_mb = self._process.memory_info().rss / (1024 * 1024)
            except Exception:
                return
            with self._lock:
                self._memory_samples.append(memory_mb)

    def record_integration(self, accepted: int, rejected: int, evaluations: int) -> None:
        """Record one finished integration."""
        with self._lock:
            self._integrations += 1
            self._accepted += accepted
            self._rejected += rejected
            self._evaluations += evaluations
        self._sample_memory()

    def get_elapsed_seconds(self) -> float:
        """Get elapsed time since start."""
        if self._start_time is None:
            return 0.0
        return time.time() - self._start_time


_monitor: Optional[ResourceMonitor] = None


def get_monitor() -> ResourceMonitor:
    """Process-wide monitor shared by the integrator and the runner."""
    global _monitor
    if _monitor is None:
        _monitor = ResourceMonitor()
    return _monitor
