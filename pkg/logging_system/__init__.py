"""Structured event logging."""
from logging_system.unified_logger import (
    UnifiedLogger,
    LogEntry,
    LogLevel,
    EventType,
    FileLogHandler,
    ConsoleLogHandler,
    create_default_logger,
    get_logger,
)

__all__ = [
    "UnifiedLogger",
    "LogEntry",
    "LogLevel",
    "EventType",
    "FileLogHandler",
    "ConsoleLogHandler",
    "create_default_logger",
    "get_logger",
]
