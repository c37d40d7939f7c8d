"""Logging for the segtransfer command line.

Handlers hang off the ``segtransfer`` package logger, so modules that call
``logging.getLogger(__name__)`` are covered while other libraries keep their
own configuration. Log records go to stderr; stdout carries result tables.
"""

import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import List, Optional, Union

PACKAGE_LOGGER = "segtransfer"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Dependencies that log per-file or per-tensor detail at INFO
CHATTY_DEPENDENCIES = ("PIL", "reportlab", "torch")

_OWNED = "_segtransfer_handler"


def resolve_level(name: Union[str, int]) -> int:
    """Map a level name such as ``"debug"`` to its numeric value.

    Raises:
        ValueError: If ``name`` is not a logging level
    """
    if isinstance(name, int):
        return name
    level = logging.getLevelName(name.strip().upper())
    if not isinstance(level, int):
        raise ValueError(f"Invalid log level: {name}")
    return level


def _own(handler: logging.Handler, formatter: logging.Formatter) -> logging.Handler:
    handler.setFormatter(formatter)
    setattr(handler, _OWNED, True)
    return handler


def owned_handlers(logger: Optional[logging.Logger] = None) -> List[logging.Handler]:
    """Handlers installed by :func:`setup_logging` on the package logger."""
    logger = logger or logging.getLogger(PACKAGE_LOGGER)
    return [handler for handler in logger.handlers if getattr(handler, _OWNED, False)]


def setup_logging(
    log_level: Union[str, int] = "INFO",
    log_file: Optional[Union[str, Path]] = None,
    max_bytes: int = 10 * 1024 * 1024,
    backup_count: int = 5
) -> logging.Logger:
    """Configure the package logger for one CLI invocation.

    Calling it again replaces the handlers of the previous call.

    Args:
        log_level: Level name or number for segtransfer's own records
        log_file: Optional path of a size-rotated log file
        max_bytes: Size at which the log file rotates
        backup_count: Number of rotated files kept

    Returns:
        The configured package logger

    Raises:
        ValueError: If ``log_level`` is not a logging level
    """
    level = resolve_level(log_level)
    package = logging.getLogger(PACKAGE_LOGGER)
    package.setLevel(level)
    for handler in owned_handlers(package):
        package.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    package.addHandler(_own(logging.StreamHandler(sys.stderr), formatter))

    if log_file:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        rotating = RotatingFileHandler(path, maxBytes=max_bytes, backupCount=backup_count, encoding="utf-8")
        package.addHandler(_own(rotating, formatter))

    for name in CHATTY_DEPENDENCIES:
        logging.getLogger(name).setLevel(max(level, logging.WARNING))
    return package


def setup_logging_from_settings(settings, log_level: Optional[str] = None) -> logging.Logger:
    """Configure logging from :class:`Settings`, with an optional level override."""
    return setup_logging(
        log_level or settings.LOG_LEVEL,
        settings.LOG_FILE,
        max_bytes=settings.LOG_MAX_BYTES,
        backup_count=settings.LOG_BACKUP_COUNT,
    )
