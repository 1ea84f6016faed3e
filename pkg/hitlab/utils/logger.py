from typing import Optional
import sys

from loguru import logger

from ..config.settings import settings

# extra keys services bind, shown in this order
CONTEXT_KEYS = ("operation", "system", "base")


def _console_format(record) -> str:
    keys = [k for k in CONTEXT_KEYS if k in record["extra"]]
    context = "<cyan>[" + " ".join(f"{{extra[{k}]}}" for k in keys) + "]</cyan> " if keys else ""
    return "<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | " + context + "<level>{message}</level>\n{exception}"


def configure_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """(Re)install the sinks: stderr for people, optional JSON lines for runs kept on disk

    stdout is reserved for command output (reports, CSV series), so nothing logs there.
    """
    logger.remove()
    console_level = level or ("DEBUG" if settings.debug else settings.log_level)
    logger.add(sys.stderr, format=_console_format, level=console_level, backtrace=False, diagnose=False)

    target = log_file or settings.log_file
    if target:
        logger.add(target, serialize=True, rotation="10 MB", retention="7 days", level="DEBUG")


configure_logging()

__all__ = ["logger", "configure_logging", "CONTEXT_KEYS"]
