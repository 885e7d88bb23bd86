# src/core/logging.py
"""structlog setup shared by the CLI and the test-suite"""

import logging
import sys

import structlog


def configure_logging(debug: bool = False) -> None:
    """
    Route structlog through a key-value renderer on stderr.

    stdout is reserved for command results.
    """
    level = logging.DEBUG if debug else logging.INFO
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level)

    structlog.configure(
        processors=[
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.KeyValueRenderer(key_order=["timestamp", "level", "event"]),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
    )
