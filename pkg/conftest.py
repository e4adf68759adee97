"""Shared pytest fixtures; sits at the repo root so the top-level packages import."""

import logging
import os
import sys

import pytest

ROOT = os.path.dirname(os.path.abspath(__file__))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from core.log import reset_logging  # noqa: E402

FIXTURES = os.path.join(ROOT, "tests", "fixtures")


@pytest.fixture
def fixture_path():
    def _path(name):
        return os.path.join(FIXTURES, name)

    return _path


@pytest.fixture
def write_ohlcv(tmp_path):
    """Write a Yahoo-layout CSV from (date, open, high, low, close, volume) rows."""

    def _write(rows, name="prices.csv"):
        path = tmp_path / name
        lines = ["Date,Open,High,Low,Close,Adj Close,Volume"]
        lines += [f"{d},{o},{h},{l},{c},{c},{v}" for d, o, h, l, c, v in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return str(path)

    return _write


@pytest.fixture(autouse=True)
def _detach_run_logging():
    """CLI runs install root handlers bound to the captured stderr; drop them after each test."""
    level = logging.getLogger().level
    yield
    reset_logging()
    logging.getLogger().setLevel(level)
