"""Loguru sink setup driven by ``settings.log_level`` / ``settings.log_format``."""

from __future__ import annotations

import sys

from loguru import logger

from navstack.config import settings

_TEXT_FORMAT = (
    "<green>{time:HH:mm:ss.SSS}</green> | <level>{level: <7}</level> | {message}"
)


def configure_logging(level: str | None = None, fmt: str | None = None) -> None:
    """Replace loguru's default sink with a single stderr sink.

    ``fmt="json"`` emits one serialized record per line; ``"text"`` is meant for
    terminals.
    """
    level = (level or settings.log_level).upper()
    fmt = (fmt or settings.log_format).lower()

    logger.remove()
    if fmt == "json":
        logger.add(sys.stderr, level=level, serialize=True)
    else:
        logger.add(sys.stderr, level=level, format=_TEXT_FORMAT, colorize=None)
    logger.debug("[log] configured level={} format={}", level, fmt)
