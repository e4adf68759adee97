"""Plot data: the series behind the actual-vs-predicted close charts, as CSV."""

import numpy as np
import pandas as pd

from core.errors import ContractError
from core.io import write_csv_atomic


def emit_plot_series(actual, predictions, dates, path):
    """Write `date,actual,<model...>`, one row per test day; replaces the file atomically."""
    actual = np.asarray(actual, dtype=float)
    if len(dates) != len(actual):
        raise ContractError(f"{len(dates)} dates for {len(actual)} actual prices")
    frame = pd.DataFrame({"date": pd.DatetimeIndex(dates).strftime("%Y-%m-%d"), "actual": actual})
    for label, values in predictions.items():
        values = np.asarray(values, dtype=float)
        if values.shape != actual.shape:
            raise ContractError(f"model '{label}' has {values.size} predictions for {actual.size} test days")
        frame[label] = values
    write_csv_atomic(path, frame, index=False, float_format="%.6f")
    return path
