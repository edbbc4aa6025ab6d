"""
Structured logging for honeyguard
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Any, Optional

import structlog

from .config import config

_SHARED_PROCESSORS = [
    structlog.stdlib.add_logger_name,
    structlog.stdlib.add_log_level,
    structlog.processors.TimeStamper(fmt="iso"),
]


class Logger:
    """structlog front-end over stdlib handlers (console + optional rotating file)"""

    def __init__(self, name: str = "honeyguard"):
        self.name = name
        self._setup_logging()
        self.logger = structlog.get_logger(self.name)

    def _setup_logging(self) -> None:
        log_level = getattr(logging, str(config.get('logging.level', 'INFO')).upper(), logging.INFO)
        log_file = config.get('logging.file')
        max_size = config.get('logging.max_size', 10485760)
        backup_count = config.get('logging.backup_count', 5)

        structlog.configure(
            processors=[
                structlog.stdlib.filter_by_level,
                *_SHARED_PROCESSORS,
                structlog.processors.format_exc_info,
                structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
            ],
            logger_factory=structlog.stdlib.LoggerFactory(),
            wrapper_class=structlog.stdlib.BoundLogger,
            cache_logger_on_first_use=True,
        )

        app_logger = logging.getLogger(self.name)
        app_logger.setLevel(log_level)
        app_logger.handlers.clear()
        app_logger.propagate = False

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(log_level)
        console_handler.setFormatter(structlog.stdlib.ProcessorFormatter(
            processor=structlog.dev.ConsoleRenderer(colors=False),
            foreign_pre_chain=_SHARED_PROCESSORS,
        ))
        app_logger.addHandler(console_handler)

        if log_file:
            try:
                Path(log_file).parent.mkdir(parents=True, exist_ok=True)
                file_handler = logging.handlers.RotatingFileHandler(
                    log_file,
                    maxBytes=max_size,
                    backupCount=backup_count,
                    encoding='utf-8'
                )
                file_handler.setLevel(logging.DEBUG)
                file_handler.setFormatter(structlog.stdlib.ProcessorFormatter(
                    processor=structlog.processors.JSONRenderer(sort_keys=True),
                    foreign_pre_chain=_SHARED_PROCESSORS,
                ))
                app_logger.addHandler(file_handler)
            except OSError:
                pass  # console logging still works

    def set_level(self, level: str) -> None:
        numeric = getattr(logging, level.upper(), logging.INFO)
        app_logger = logging.getLogger(self.name)
        app_logger.setLevel(numeric)
        for handler in app_logger.handlers:
            if isinstance(handler, logging.StreamHandler) and not isinstance(
                    handler, logging.handlers.RotatingFileHandler):
                handler.setLevel(numeric)

    def get_logger(self, name: Optional[str] = None):
        return structlog.get_logger(name or self.name)

    def info(self, message: str, **kwargs: Any) -> None:
        self.logger.info(message, **kwargs)

    def debug(self, message: str, **kwargs: Any) -> None:
        self.logger.debug(message, **kwargs)

    def warning(self, message: str, **kwargs: Any) -> None:
        self.logger.warning(message, **kwargs)

    def error(self, message: str, **kwargs: Any) -> None:
        self.logger.error(message, **kwargs)

    def log_operation(self, operation: str, status: str = "started", **kwargs: Any) -> None:
        self.info(f"Operation: {operation} - {status}", **kwargs)

    def log_performance(self, operation: str, duration: float, **kwargs: Any) -> None:
        self.info(f"Performance: {operation}", duration_ms=round(duration * 1000, 2), **kwargs)

    def log_error(self, error: Exception, context: str = "", **kwargs: Any) -> None:
        self.error(f"Error in {context}: {error}", error_type=type(error).__name__, **kwargs)


# Global logger instance
logger = Logger()
