"""Logging configuration for iupsim."""
import logging
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.theme import Theme

LOGGER_NAME = "iupsim"

CUSTOM_THEME = Theme({
    "info": "cyan",
    "warning": "yellow",
    "error": "red bold",
    "debug": "grey50",
})


class ColorizedFormatter(logging.Formatter):
    """Formatter that wraps the level name in rich markup."""

    COLORS = {
        'DEBUG': 'grey50',
        'INFO': 'cyan',
        'WARNING': 'yellow',
        'ERROR': 'red',
        'CRITICAL': 'red bold',
    }

    def format(self, record: logging.LogRecord) -> str:
        """Format log record with colors.

        Args:
            record: Log record to format

        Returns:
            str: Formatted log message
        """
        levelname = record.levelname
        if levelname in self.COLORS:
            record.levelname = f"[{self.COLORS[levelname]}]{levelname}[/]"
        try:
            return super().format(record)
        finally:
            record.levelname = levelname


def setup_logger(
    verbose: bool = False,
    log_file: Optional[str] = None,
    console: Optional[Console] = None,
) -> logging.Logger:
    """Configure and return the package logger.

    Args:
        verbose: Enable debug logging
        log_file: Optional file path for a plain-text log
        console: Console to log to; stderr by default so that data written
            to stdout stays clean

    Returns:
        logging.Logger: Configured logger instance
    """
    logger = logging.getLogger(LOGGER_NAME)
    level = logging.DEBUG if verbose else logging.INFO
    logger.setLevel(level)
    logger.handlers.clear()
    logger.propagate = False

    rich_handler = RichHandler(
        console=console or Console(theme=CUSTOM_THEME, stderr=True),
        show_path=verbose,
        markup=True,
        rich_tracebacks=True,
        tracebacks_show_locals=verbose,
        show_time=False,
        show_level=True,
    )
    rich_handler.setLevel(level)
    rich_handler.setFormatter(ColorizedFormatter("%(message)s"))
    logger.addHandler(rich_handler)

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
        ))
        logger.addHandler(file_handler)

    # numpy/scipy RuntimeWarnings go through the same handlers
    logging.captureWarnings(True)
    warnings_logger = logging.getLogger("py.warnings")
    warnings_logger.handlers = list(logger.handlers)

    return logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """Get the iupsim logger, or one of its children.

    Args:
        name: Optional child name, e.g. ``"oracle"``

    Returns:
        logging.Logger: Logger instance
    """
    return logging.getLogger(f"{LOGGER_NAME}.{name}" if name else LOGGER_NAME)
