"""
Unified Logging Interface.

Structured event log of analysis runs: every CLI command records when it
starts and ends, which model it loaded, the equilibria it found, the limits
it predicted and the checks it ran. Entries go to pluggable handlers (a JSON
event file and the console).
"""
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Optional, Dict, Any, List, Protocol

from config.constants import EVENT_LOG_FILENAME

try:
    from config.settings import LOGS_DIR
except ImportError:
    LOGS_DIR = Path(__file__).parent.parent / "logs"

logger = logging.getLogger(__name__)


class LogLevel(Enum):
    """Log severity levels."""
    DEBUG = "debug"
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"
    CRITICAL = "critical"


class EventType(Enum):
    """Types of loggable events."""
    # Run events
    ANALYSIS_START = "analysis_start"
    ANALYSIS_COMPLETE = "analysis_complete"
    ERROR = "error"

    # Model events
    MODEL_LOADED = "model_loaded"
    MODEL_VALIDATION = "model_validation"
    NEAR_CRITICAL_ATOM = "near_critical_atom"

    # Result events
    EQUILIBRIUM_FOUND = "equilibrium_found"
    LIMIT_PREDICTED = "limit_predicted"
    VERIFICATION_RESULT = "verification_result"
    CLAMP_APPLIED = "clamp_applied"


@dataclass
class LogEntry:
    """
    Unified log entry structure.

    All logs follow this structure for consistency.
    """
    timestamp: datetime
    event_type: EventType
    level: LogLevel
    message: str
    data: Dict[str, Any] = field(default_factory=dict)
    source: str = ""
    correlation_id: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            "timestamp": self.timestamp.isoformat(),
            "event_type": self.event_type.value,
            "level": self.level.value,
            "message": self.message,
            "data": self.data,
            "source": self.source,
            "correlation_id": self.correlation_id,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LogEntry":
        """Create from dictionary."""
        return cls(
            timestamp=datetime.fromisoformat(data["timestamp"]),
            event_type=EventType(data["event_type"]),
            level=LogLevel(data["level"]),
            message=data["message"],
            data=data.get("data", {}),
            source=data.get("source", ""),
            correlation_id=data.get("correlation_id"),
        )


class LogHandler(Protocol):
    """Protocol for log handlers."""

    def handle(self, entry: LogEntry) -> None:
        """Handle a log entry."""
        ...


class FileLogHandler:
    """Handler that writes logs to a JSON file."""

    def __init__(
        self,
        log_dir: Optional[Path] = None,
        filename: str = EVENT_LOG_FILENAME,
        max_entries: int = 10000,
    ):
        self.log_dir = Path(log_dir or LOGS_DIR)
        self.log_dir.mkdir(parents=True, exist_ok=True)
        self.log_file = self.log_dir / filename
        self.max_entries = max_entries
        self._entries: List[Dict[str, Any]] = []
        self._load_existing()

    def _load_existing(self) -> None:
        if self.log_file.exists():
            try:
                with open(self.log_file, "r") as f:
                    self._entries = json.load(f)
            except (OSError, json.JSONDecodeError) as e:
                logger.warning(f"Failed to load existing event log: {e}")
                self._entries = []

    def _save(self) -> None:
        try:
            if len(self._entries) > self.max_entries:
                self._entries = self._entries[-self.max_entries:]
            with open(self.log_file, "w") as f:
                json.dump(self._entries, f, indent=2, default=str)
        except OSError as e:
            logger.error(f"Failed to save event log: {e}")

    def handle(self, entry: LogEntry) -> None:
        """Handle a log entry by writing to file."""
        self._entries.append(entry.to_dict())
        self._save()

    def get_entries(
        self,
        event_type: Optional[EventType] = None,
        correlation_id: Optional[str] = None,
        limit: int = 100,
    ) -> List[LogEntry]:
        """Most recent entries, optionally filtered by type or run."""
        entries = self._entries
        if event_type:
            entries = [e for e in entries if e["event_type"] == event_type.value]
        if correlation_id:
            entries = [e for e in entries if e.get("correlation_id") == correlation_id]
        return [LogEntry.from_dict(e) for e in entries[-limit:]]


class ConsoleLogHandler:
    """Handler that forwards entries to the standard logging module."""

    def __init__(self, min_level: LogLevel = LogLevel.INFO):
        self.min_level = min_level
        self._level_order = [LogLevel.DEBUG, LogLevel.INFO, LogLevel.WARNING, LogLevel.ERROR, LogLevel.CRITICAL]

    def handle(self, entry: LogEntry) -> None:
        if self._level_order.index(entry.level) < self._level_order.index(self.min_level):
            return
        log_func = getattr(logger, entry.level.value)
        log_func(f"[{entry.event_type.value}] {entry.message}")


class UnifiedLogger:
    """
    Unified logging interface.

    One instance per run; correlation_id ties the entries of a run together.
    """

    def __init__(self, source: str = "", correlation_id: Optional[str] = None):
        self.source = source
        self.correlation_id = correlation_id
        self._handlers: List[LogHandler] = []

    def add_handler(self, handler: LogHandler) -> "UnifiedLogger":
        self._handlers.append(handler)
        return self

    def remove_handler(self, handler: LogHandler) -> None:
        if handler in self._handlers:
            self._handlers.remove(handler)

    def _log(
        self,
        event_type: EventType,
        level: LogLevel,
        message: str,
        data: Optional[Dict[str, Any]] = None,
    ) -> LogEntry:
        """Create and dispatch a log entry."""
        entry = LogEntry(
            timestamp=datetime.now(timezone.utc),
            event_type=event_type,
            level=level,
            message=message,
            data=data or {},
            source=self.source,
            correlation_id=self.correlation_id,
        )

        for handler in self._handlers:
            try:
                handler.handle(entry)
            except Exception as e:
                logger.error(f"Handler error: {e}")

        return entry

    # =========================================================================
    # Run Logging
    # =========================================================================

    def log_analysis_start(self, command: str, model_path: str = "", **extra) -> LogEntry:
        return self._log(
            EventType.ANALYSIS_START,
            LogLevel.INFO,
            f"{command} started" + (f" on {model_path}" if model_path else ""),
            data={"command": command, "model_path": model_path, **extra},
        )

    def log_analysis_complete(self, command: str, exit_code: int, elapsed_seconds: float, **extra) -> LogEntry:
        return self._log(
            EventType.ANALYSIS_COMPLETE,
            LogLevel.INFO if exit_code == 0 else LogLevel.WARNING,
            f"{command} finished with exit code {exit_code} in {elapsed_seconds:.3f}s",
            data={"command": command, "exit_code": exit_code, "elapsed_seconds": elapsed_seconds, **extra},
        )

    def log_error(self, error: Exception, context: str = "", **extra) -> LogEntry:
        return self._log(
            EventType.ERROR,
            LogLevel.ERROR,
            f"Error in {context}: {type(error).__name__}: {error}",
            data={
                "error_type": type(error).__name__,
                "error_message": str(error),
                "context": context,
                **extra,
            },
        )

    # =========================================================================
    # Model Logging
    # =========================================================================

    def log_model_loaded(self, name: str, n: int, incidence: str, **extra) -> LogEntry:
        return self._log(
            EventType.MODEL_LOADED,
            LogLevel.INFO,
            f"Model '{name}' loaded: {n} features, incidence {incidence}",
            data={"name": name, "n": n, "incidence": incidence, **extra},
        )

    def log_model_validation(self, name: str, passed: bool, violations: List[str], **extra) -> LogEntry:
        return self._log(
            EventType.MODEL_VALIDATION,
            LogLevel.INFO if passed else LogLevel.WARNING,
            f"Model '{name}' " + ("satisfies the standing assumptions" if passed
                                  else f"has {len(violations)} violation(s)"),
            data={"name": name, "passed": passed, "violations": violations, **extra},
        )

    def log_near_critical_atom(self, atom: str, r0: float, **extra) -> LogEntry:
        return self._log(
            EventType.NEAR_CRITICAL_ATOM,
            LogLevel.WARNING,
            f"Atom {atom} is near-critical (R0 = {r0:.12f})",
            data={"atom": atom, "r0": r0, **extra},
        )

    # =========================================================================
    # Result Logging
    # =========================================================================

    def log_equilibrium_found(self, antichain: str, support: List[str], residual: float, **extra) -> LogEntry:
        return self._log(
            EventType.EQUILIBRIUM_FOUND,
            LogLevel.INFO,
            f"Equilibrium for antichain {antichain}: support {{{','.join(support)}}}, residual {residual:.3e}",
            data={"antichain": antichain, "support": support, "residual": residual, **extra},
        )

    def log_limit_predicted(self, antichain: str, support: List[str], **extra) -> LogEntry:
        return self._log(
            EventType.LIMIT_PREDICTED,
            LogLevel.INFO,
            f"Predicted limit: antichain {antichain}, support {{{','.join(support)}}}",
            data={"antichain": antichain, "support": support, **extra},
        )

    def log_verification_result(self, check: str, passed: bool, **extra) -> LogEntry:
        return self._log(
            EventType.VERIFICATION_RESULT,
            LogLevel.INFO if passed else LogLevel.WARNING,
            f"{check}: {'passed' if passed else 'FAILED'}",
            data={"check": check, "passed": passed, **extra},
        )

    def log_clamp_applied(self, max_clamp: float, **extra) -> LogEntry:
        return self._log(
            EventType.CLAMP_APPLIED,
            LogLevel.WARNING,
            f"Integrator clamped the state back to [0, 1] by up to {max_clamp:.3e}",
            data={"max_clamp": max_clamp, **extra},
        )


def create_default_logger(
    source: str = "sis_runner",
    log_dir: Optional[Path] = None,
    correlation_id: Optional[str] = None,
) -> UnifiedLogger:
    """
    Create a logger with default handlers.

    Args:
        source: Source identifier for log entries
        log_dir: Directory of the JSON event file
        correlation_id: Identifier shared by all entries of one run

    Returns:
        Configured UnifiedLogger instance
    """
    unified = UnifiedLogger(source=source, correlation_id=correlation_id)
    unified.add_handler(FileLogHandler(log_dir=log_dir))
    unified.add_handler(ConsoleLogHandler(min_level=LogLevel.WARNING))
    return unified


# Singleton instance for convenience
_default_logger: Optional[UnifiedLogger] = None


def get_logger(source: str = "sis_runner") -> UnifiedLogger:
    """Get or create the default logger instance."""
    global _default_logger
    if _default_logger is None:
        _default_logger = create_default_logger(source)
    return _default_logger
