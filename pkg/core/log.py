"""
Logging setup and console banners
"""

import logging
import os
from datetime import datetime

RULE = "=" * 70
LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def reset_logging():
    """Detach and close the handlers a previous setup_logging call installed."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_forecaster", False):
            root.removeHandler(handler)
            handler.close()


def _own(handler, fmt):
    handler.setFormatter(logging.Formatter(fmt))
    handler._forecaster = True
    logging.getLogger().addHandler(handler)


def setup_logging(level="INFO", log_dir=None):
    """Configure the root logger; optionally tee into a timestamped run log.

    Calling it again replaces its own handlers and leaves any others alone.
    Returns the log file path (or None).
    """
    reset_logging()
    logging.getLogger().setLevel(level)
    _own(logging.StreamHandler(), "%(levelname)s %(name)s: %(message)s")

    log_file = None
    if log_dir is not None:
        os.makedirs(log_dir, exist_ok=True)
        log_file = os.path.join(log_dir, f"log_{datetime.now().strftime('%Y%m%d_%H%M%S')}.txt")
        _own(logging.FileHandler(log_file, encoding="utf-8"), LOG_FORMAT)
    return log_file


def banner(title):
    print(RULE)
    print(title)
    print(RULE)


def ok(message):
    print(f"✓ {message}")


def fail(message):
    print(f"✗ {message}")
