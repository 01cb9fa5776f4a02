"""Structured logging configuration for tc-sched.

Every module logs through a namespace logger (`tcs.exact`, `tcs.heur`, ...).
Records go to stderr and into a bounded in-memory buffer that the HTTP
API serves at /api/logs, filterable by namespace and level.
"""

import logging
import os
import sys
from collections import deque
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import Optional

LOGGER_PREFIX = 'tcs'

NAMESPACES = {
    'model': 'Taskset Model',
    'validate': 'Validator',
    'exact': 'Exact Solver',
    'heur': 'Heuristic Scheduler',
    'metrics': 'Metrics',
    'gen': 'Taskset Generator',
    'bench': 'Benchmarks',
    'api': 'API Routes',
}

DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Third-party loggers that are too chatty at INFO
QUIET_LOGGERS = ("uvicorn.access", "httpx", "httpcore", "matplotlib")


@dataclass
class LogEntry:
    timestamp: str
    level: str
    namespace: str
    message: str

    def to_dict(self) -> dict:
        return asdict(self)


def _namespace_of(logger_name: str) -> str:
    prefix, _, rest = logger_name.partition('.')
    if prefix == LOGGER_PREFIX and rest:
        return rest.split('.')[0]
    return 'general'


class LogBufferHandler(logging.Handler):
    """Keeps the most recent records as LogEntry items."""

    def __init__(self, buffer_size: int = 500):
        super().__init__()
        self.buffer: deque[LogEntry] = deque(maxlen=buffer_size)

    def emit(self, record: logging.LogRecord):
        try:
            self.buffer.append(LogEntry(
                timestamp=datetime.fromtimestamp(record.created, timezone.utc).isoformat(),
                level=record.levelname,
                namespace=_namespace_of(record.name),
                message=self.format(record),
            ))
        except Exception:
            self.handleError(record)

    def get_history(
        self,
        count: int = 100,
        namespace: Optional[str] = None,
        min_level: Optional[str] = None,
    ) -> list[dict]:
        """Newest `count` entries (oldest first), optionally filtered."""
        threshold = logging.getLevelName(min_level.upper()) if min_level else logging.NOTSET
        if not isinstance(threshold, int):
            raise ValueError(f"unknown log level {min_level!r}")
        entries = [
            e for e in self.buffer
            if (namespace is None or e.namespace == namespace)
            and logging.getLevelName(e.level) >= threshold
        ]
        return [e.to_dict() for e in entries[-count:]]

    def clear_buffer(self):
        self.buffer.clear()


_buffer_handler: Optional[LogBufferHandler] = None


def get_buffer_handler() -> LogBufferHandler:
    """The process-wide buffer handler, created on first use."""
    global _buffer_handler
    if _buffer_handler is None:
        _buffer_handler = LogBufferHandler(int(os.environ.get('TCS_LOG_BUFFER_SIZE', '500')))
        _buffer_handler.setFormatter(logging.Formatter('%(message)s'))
    return _buffer_handler


def _resolve_level(level: str | int | None) -> int:
    if level is None:
        level = os.environ.get('TCS_LOG_LEVEL', 'INFO')
    if isinstance(level, int):
        return level
    resolved = logging.getLevelName(level.upper())
    return resolved if isinstance(resolved, int) else logging.INFO


def setup_logging(level: str | int | None = None, log_format: Optional[str] = None) -> None:
    """
    Configure logging for the CLI and the server.

    Args:
        level: Level name or constant (default: TCS_LOG_LEVEL or INFO)
        log_format: Format of the stderr handler
    """
    root = logging.getLogger()
    root.handlers.clear()

    # stderr keeps stdout free for CLI output
    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(logging.Formatter(log_format or DEFAULT_FORMAT))
    root.addHandler(console)
    root.addHandler(get_buffer_handler())

    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)

    set_log_level(_resolve_level(level))


def set_log_level(level: str | int) -> None:
    """Change the level of the root logger, its handlers and every namespace logger."""
    resolved = _resolve_level(level)
    root = logging.getLogger()
    root.setLevel(resolved)
    for handler in root.handlers:
        handler.setLevel(resolved)
    for namespace in NAMESPACES:
        logging.getLogger(f'{LOGGER_PREFIX}.{namespace}').setLevel(resolved)


def get_logger(name: str, namespace: Optional[str] = None) -> logging.Logger:
    """Namespace logger when `namespace` is known, else the module logger."""
    if namespace in NAMESPACES:
        return logging.getLogger(f'{LOGGER_PREFIX}.{namespace}')
    return logging.getLogger(name)
