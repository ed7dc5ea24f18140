"""
Logging helpers.

Library modules only create loggers; handlers are installed by applications
(the command-line interface) through :func:`configure_logging`.
"""

import logging

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level: int = logging.INFO) -> logging.Logger:
    """
    Install a single stream handler on the package logger.

    Args:
        level: Logging level for the ``staci`` logger

    Returns:
        The configured package logger
    """
    root = logging.getLogger("staci")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(level)
    root.propagate = False
    return root
