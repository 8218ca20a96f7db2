"""
Usage:
    from common.logging_config import setup_logging
    logger = setup_logging(__name__)
    logger.info("Analysis started")

    Input:
        name: Logger name (typically __name__ from calling module)
        level: Logging level (default: MXQ_LOG_LEVEL from common.config)
        format_string: Optional custom format string
    returns:
        Configured logger instance

    Log records go to stderr, so CSV/JSON written to stdout stays clean.

    Example:
        >>> logger = setup_logging(__name__)
        >>> logger.info("✅ Factorization complete")
"""

import logging
import sys
from typing import Optional

from .config import LOG_LEVEL


def setup_logging(name: str, level: Optional[int] = None, format_string: Optional[str] = None) -> logging.Logger:
    if format_string is None:
        format_string = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    if level is None:
        level = getattr(logging, LOG_LEVEL, logging.INFO)

    # Only configure root logger once
    if not logging.getLogger().handlers:
        logging.basicConfig(level=level, format=format_string, stream=sys.stderr)

    # Return logger for the specific module
    logger = logging.getLogger(name)
    return logger
