"""Structured logging for memsplit: rich console output plus optional JSON lines."""

import json
import logging
import os
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

from rich.console import Console
from rich.logging import RichHandler


DEFAULT_CONSOLE_LEVEL = "INFO"


class _JsonLineFormatter(logging.Formatter):
    """Formats records as one JSON object per line."""

    def format(self, record: logging.LogRecord) -> str:
        payload = {
            "timestamp": self.formatTime(record),
            "name": record.name,
            "level": record.levelname,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
            "extra": getattr(record, "extra", "{}"),
        }
        return json.dumps(payload)


class StructuredLogger:
    """A logger that outputs structured logs to the console and, optionally, a file."""

    def __init__(
        self,
        name: str,
        log_dir: Optional[str] = None,
        console_level: str = DEFAULT_CONSOLE_LEVEL,
        file_level: str = "DEBUG",
    ):
        """Console output always; JSON lines under ``log_dir`` only when it is given."""
        self.name = name
        self.log_dir = Path(log_dir) if log_dir else None
        self.console_level = getattr(logging, console_level.upper())
        self.file_level = getattr(logging, file_level.upper())

        self.logger = logging.getLogger(name)
        self.logger.propagate = False
        self._configure_logging()

    def _configure_logging(self) -> None:
        """Attach a rich console handler and an optional JSON file handler."""
        self.logger.handlers.clear()

        console = Console(stderr=True)
        console_handler = RichHandler(
            console=console,
            show_time=True,
            show_path=False,
            markup=False,
            rich_tracebacks=True,
            level=self.console_level,
        )
        self.logger.addHandler(console_handler)
        level = self.console_level

        if self.log_dir is not None:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            log_file = self.log_dir / f"{self.name}_{datetime.now():%Y%m%d}.log"
            file_handler = logging.FileHandler(log_file)
            file_handler.setLevel(self.file_level)
            file_handler.setFormatter(_JsonLineFormatter())
            self.logger.addHandler(file_handler)
            level = min(level, self.file_level)

        self.logger.setLevel(level)

    def reconfigure(
        self,
        log_dir: Optional[str] = None,
        console_level: Optional[str] = None,
        file_level: Optional[str] = None,
    ) -> None:
        """Rebuild handlers, e.g. after the CLI has read its configuration."""
        self.log_dir = Path(log_dir) if log_dir else None
        if console_level:
            self.console_level = getattr(logging, console_level.upper())
        if file_level:
            self.file_level = getattr(logging, file_level.upper())
        self._configure_logging()

    def _log(self, level: int, msg: str, extra: Optional[Dict[str, Any]] = None, **kwargs) -> None:
        context = json.dumps(extra or {}, default=str)
        self.logger.log(level, msg, extra={"extra": context}, **kwargs)

    def debug(self, msg: str, extra: Optional[Dict[str, Any]] = None, **kwargs) -> None:
        self._log(logging.DEBUG, msg, extra, **kwargs)

    def info(self, msg: str, extra: Optional[Dict[str, Any]] = None, **kwargs) -> None:
        self._log(logging.INFO, msg, extra, **kwargs)

    def warning(self, msg: str, extra: Optional[Dict[str, Any]] = None, **kwargs) -> None:
        self._log(logging.WARNING, msg, extra, **kwargs)

    def error(self, msg: str, extra: Optional[Dict[str, Any]] = None, **kwargs) -> None:
        self._log(logging.ERROR, msg, extra, **kwargs)

    def exception(self, msg: str, extra: Optional[Dict[str, Any]] = None, **kwargs) -> None:
        """Error record carrying the active traceback."""
        self._log(logging.ERROR, msg, extra, exc_info=True, **kwargs)


# Package logger; the CLI reconfigures it from LoggingConfig
logger = StructuredLogger(
    "memsplit",
    log_dir=os.getenv("MEMSPLIT_LOG_DIR"),
    console_level=os.getenv("MEMSPLIT_LOG_LEVEL", DEFAULT_CONSOLE_LEVEL),
    file_level=os.getenv("MEMSPLIT_LOG_FILE_LEVEL", "DEBUG"),
)
