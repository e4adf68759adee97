"""
Moving-average indicators
-------------------------
EWMA over closing prices and sentiment channels, spans 3 / 7 / 14 / 30 days.

adjust=True (default) uses finite-horizon weights
    out_t = sum_i (1-a)^i x_{t-i} / sum_i (1-a)^i,  a = 2 / (span + 1)
adjust=False uses the recursive form y_t = a x_t + (1-a) y_{t-1}.
"""

import numpy as np
import pandas as pd

from core.errors import ValidationError

EWMA_SPANS = (3, 7, 14, 30)


def ewma(series, span, adjust=True):
    if isinstance(span, bool) or int(span) != span or span < 1:
        raise ValidationError(f"EWMA span must be a whole number >= 1, got {span}")
    values = np.asarray(series, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValidationError("EWMA needs a non-empty 1-D series")
    return pd.Series(values).ewm(span=int(span), adjust=adjust).mean().to_numpy()


def ewma_column_name(column, span):
    return f"{column}_ewma_{span}"
