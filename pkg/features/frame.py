"""
Feature frame
-------------
Sentiment datasets get 24 columns, in this order:

    open, high, low, close, volume,
    positive, negative, neutral,
    close_ewma_{3,7,14,30},
    positive_ewma_{3,7,14,30}, negative_ewma_{3,7,14,30}, neutral_ewma_{3,7,14,30}

The price-only baseline keeps the first five plus the four close EWMAs (9).
Target of row t is the raw close of trading day t+1; the last day is dropped.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
from sklearn.preprocessing import StandardScaler

from core.errors import FormatError, ValidationError
from core.io import write_csv_atomic
from features.daily import SENTIMENT_COLUMNS, sentiment_matrix
from features.indicators import EWMA_SPANS, ewma, ewma_column_name
from ingest.ohlcv import bars_to_frame

logger = logging.getLogger(__name__)

PRICE_COLUMNS = ("open", "high", "low", "close", "volume")
TARGET_COLUMN = "target"
STD_FLOOR = 1e-12
TARGET_SCALINGS = ("separate", "close")


def feature_columns(with_sentiment=True, spans=EWMA_SPANS):
    columns = list(PRICE_COLUMNS)
    if with_sentiment:
        columns += list(SENTIMENT_COLUMNS)
    columns += [ewma_column_name("close", s) for s in spans]
    if with_sentiment:
        for channel in SENTIMENT_COLUMNS:
            columns += [ewma_column_name(channel, s) for s in spans]
    return tuple(columns)


@dataclass(frozen=True)
class FeatureFrame:
    dates: pd.DatetimeIndex
    matrix: np.ndarray
    column_names: tuple
    target: np.ndarray

    def __post_init__(self):
        n = len(self.dates)
        if self.matrix.shape != (n, len(self.column_names)):
            raise ValidationError(f"matrix shape {self.matrix.shape} does not match {n} dates x {len(self.column_names)} columns")
        if self.target.shape != (n,):
            raise ValidationError(f"target length {self.target.shape} does not match {n} dates")
        if len(set(self.column_names)) != len(self.column_names):
            raise ValidationError("feature column names must be unique")

    def __len__(self):
        return len(self.dates)

    def rows(self, index):
        return FeatureFrame(self.dates[index], self.matrix[index], self.column_names, self.target[index])

    def to_frame(self):
        frame = pd.DataFrame(self.matrix, index=self.dates, columns=list(self.column_names))
        frame[TARGET_COLUMN] = self.target
        frame.index.name = "date"
        return frame


def assemble_feature_frame(bars, sentiment=None, spans=EWMA_SPANS, adjust=True):
    """Build the frame from aligned bars and imputed sentiment (None -> price-only)."""
    if len(bars) < 2:
        raise ValidationError(f"need at least 2 aligned days to build a frame, got {len(bars)}")
    prices = bars_to_frame(bars)
    with_sentiment = sentiment is not None

    if with_sentiment:
        bar_dates = [b.date for b in bars]
        sent_dates = [s.date for s in sentiment]
        if bar_dates != sent_dates:
            raise ValidationError("bars and sentiment must cover exactly the same dates")
        scores = sentiment_matrix(sentiment)
        if np.isnan(scores).any():
            raise ValidationError("sentiment still has unobserved days; impute first")
        for k, channel in enumerate(SENTIMENT_COLUMNS):
            prices[channel] = scores[:, k]

    for s in spans:
        prices[ewma_column_name("close", s)] = ewma(prices["close"].to_numpy(), s, adjust=adjust)
    if with_sentiment:
        for channel in SENTIMENT_COLUMNS:
            for s in spans:
                prices[ewma_column_name(channel, s)] = ewma(prices[channel].to_numpy(), s, adjust=adjust)

    columns = feature_columns(with_sentiment, spans)
    # next-day close; the final day has no target
    target = prices["close"].shift(-1).to_numpy()[:-1]
    matrix = prices[list(columns)].to_numpy(dtype=float)[:-1]
    if np.isnan(matrix).any() or np.isnan(target).any():
        raise ValidationError("feature frame contains missing values")
    return FeatureFrame(prices.index[:-1], matrix, columns, target)


def price_only_frame(bars, spans=EWMA_SPANS, adjust=True):
    return assemble_feature_frame(bars, None, spans=spans, adjust=adjust)


@dataclass(frozen=True)
class ScalerParams:
    """Per-column mean/std (features then target) and the date range they were fit on."""

    column_names: tuple
    mean: np.ndarray
    std: np.ndarray
    fit_range: tuple

    def column_index(self, column):
        names = list(self.column_names) + [TARGET_COLUMN]
        if column not in names:
            raise ValidationError(f"scaler has no column '{column}'")
        return names.index(column)


def fit_scaler(frame, fit_range, target_scaling="separate"):
    """Column statistics over rows inside fit_range.

    target_scaling="close" reuses the close column's mean/std for the target.
    """
    if target_scaling not in TARGET_SCALINGS:
        raise ValidationError(f"target_scaling must be one of {', '.join(TARGET_SCALINGS)}, got '{target_scaling}'")
    start, end = pd.Timestamp(fit_range[0]), pd.Timestamp(fit_range[1])
    mask = (frame.dates >= start) & (frame.dates <= end)
    if not mask.any():
        raise ValidationError(f"scaler fit range {start.date()}..{end.date()} selects no rows")
    data = np.column_stack([frame.matrix, frame.target])[mask]
    scaler = StandardScaler().fit(data)
    # population std; near-constant columns scale by 1
    std = np.sqrt(scaler.var_)
    std = np.where(std < STD_FLOOR, 1.0, std)
    mean = scaler.mean_.copy()
    if target_scaling == "close":
        close = list(frame.column_names).index("close")
        mean[-1], std[-1] = mean[close], std[close]
    return ScalerParams(tuple(frame.column_names), mean, std, (start.date(), end.date()))


def _check_columns(frame, params):
    if tuple(frame.column_names) != tuple(params.column_names):
        raise ValidationError(
            f"scaler columns ({len(params.column_names)}) do not match frame columns ({len(frame.column_names)})"
        )


def apply_scaler(frame, params):
    _check_columns(frame, params)
    k = len(frame.column_names)
    matrix = (frame.matrix - params.mean[:k]) / params.std[:k]
    target = (frame.target - params.mean[k]) / params.std[k]
    return replace(frame, matrix=matrix, target=target)


def inverse_scale(values, params, column=TARGET_COLUMN):
    j = params.column_index(column)
    return np.asarray(values, dtype=float) * params.std[j] + params.mean[j]


def chrono_split(frame, ratio):
    if not 0.0 < ratio < 1.0:
        raise ValidationError(f"split ratio must be in (0, 1), got {ratio}")
    n = len(frame)
    cut = int(np.floor(ratio * n))
    # a nominal test share under half a row counts as empty (0.999 of 10 rows)
    if cut == 0 or cut == n or (1.0 - ratio) * n < 0.5:
        raise ValidationError(f"split ratio {ratio} on {n} rows leaves an empty train or test set")
    return frame.rows(slice(0, cut)), frame.rows(slice(cut, n))


@dataclass(frozen=True)
class WindowedSet:
    samples: np.ndarray
    targets: np.ndarray
    window: int
    end_dates: pd.DatetimeIndex = field(default=None)
    column_names: tuple = ()

    def __len__(self):
        return len(self.targets)

    def subset(self, index):
        return WindowedSet(self.samples[index], self.targets[index], self.window,
                           self.end_dates[index] if self.end_dates is not None else None, self.column_names)


def make_windows(frame, window):
    n = len(frame)
    if isinstance(window, bool) or int(window) != window or window < 1:
        raise ValidationError(f"window must be a whole number >= 1, got {window}")
    if window > n:
        raise ValidationError(f"window {window} is longer than the frame ({n} rows)")
    m = n - window + 1
    # (m, W, F) view copied so later scaling never aliases the frame
    idx = np.arange(window)[None, :] + np.arange(m)[:, None]
    samples = frame.matrix[idx].copy()
    targets = frame.target[window - 1:].copy()
    return WindowedSet(samples, targets, int(window), frame.dates[window - 1:], tuple(frame.column_names))


def split_windows(windows, last_train_date):
    """Train windows end on or before last_train_date; the rest are test windows."""
    boundary = pd.Timestamp(last_train_date)
    is_train = np.asarray(windows.end_dates <= boundary)
    return windows.subset(np.flatnonzero(is_train)), windows.subset(np.flatnonzero(~is_train))


def write_feature_frame(frame, path):
    write_csv_atomic(path, frame.to_frame(), float_format="%.17g", date_format="%Y-%m-%d")


def read_feature_frame(path):
    table = pd.read_csv(path, float_precision="round_trip")
    if not len(table.columns) or table.columns[0] != "date" or table.columns[-1] != TARGET_COLUMN:
        raise FormatError("expected header 'date,<features...>,target'", path=path, line=1)
    dates = pd.DatetimeIndex(pd.to_datetime(table["date"], format="%Y-%m-%d"), name="date")
    columns = tuple(table.columns[1:-1])
    return FeatureFrame(dates, table[list(columns)].to_numpy(dtype=float), columns, table[TARGET_COLUMN].to_numpy(dtype=float))
