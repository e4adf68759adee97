"""
Daily sentiment series
----------------------
Post scores -> calendar-day means -> trading-day alignment -> natural cubic
spline imputation of days without posts.
"""

import logging
from dataclasses import dataclass, replace
from datetime import date

import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline

from core.errors import ValidationError

logger = logging.getLogger(__name__)

SENTIMENT_COLUMNS = ("positive", "negative", "neutral")


@dataclass(frozen=True)
class DailySentiment:
    date: date
    positive: float | None = None
    negative: float | None = None
    neutral: float | None = None
    observed: bool = False

    def values(self):
        return (self.positive, self.negative, self.neutral)


def aggregate_daily(posts):
    """Arithmetic mean of each score per calendar day, first to last post date inclusive."""
    if not posts:
        raise ValidationError("cannot aggregate an empty post list")
    frame = pd.DataFrame(
        {
            "date": [pd.Timestamp(p.date) for p in posts],
            "positive": [p.score.positive for p in posts],
            "negative": [p.score.negative for p in posts],
            "neutral": [p.score.neutral for p in posts],
        }
    )
    means = frame.groupby("date")[list(SENTIMENT_COLUMNS)].mean()
    calendar = pd.date_range(means.index.min(), means.index.max(), freq="D")
    means = means.reindex(calendar)

    series = []
    for day, row in means.iterrows():
        if row.isna().any():
            series.append(DailySentiment(date=day.date()))
        else:
            series.append(DailySentiment(day.date(), float(row["positive"]), float(row["negative"]),
                                         float(row["neutral"]), True))
    return series


def align_to_trading_days(sentiment, bars, trim_end=False):
    """One entry per bar date, starting at the first bar date that has observed sentiment."""
    if not sentiment or not bars:
        raise ValidationError("alignment needs both sentiment and bars")
    by_date = {entry.date: entry for entry in sentiment}
    aligned = [by_date.get(bar.date, DailySentiment(date=bar.date)) for bar in bars]

    observed = [i for i, entry in enumerate(aligned) if entry.observed]
    if not observed:
        raise ValidationError("sentiment and price series share no observed dates")
    start = observed[0]
    if start > 0:
        logger.info("Dropped %d leading trading days without sentiment (series starts %s)", start, aligned[start].date)
    end = len(aligned)
    if trim_end and observed[-1] < end - 1:
        logger.warning("Trimmed %d trailing trading days without sentiment", end - 1 - observed[-1])
        end = observed[-1] + 1
    return aligned[start:end]


def natural_spline_fill(x_known, y_known, x_new):
    """Evaluate the natural cubic spline through (x_known, y_known) at x_new (no clamping)."""
    x_known = np.asarray(x_known, dtype=float)
    y_known = np.asarray(y_known, dtype=float)
    if x_known.size < 2:
        raise ValidationError("natural spline needs at least 2 knots")
    spline = CubicSpline(x_known, y_known, bc_type="natural")
    return spline(np.asarray(x_new, dtype=float))


def impute_spline(series):
    """Fill unobserved days per channel from observed knots; values clamped to [0, 1]."""
    if not series:
        raise ValidationError("cannot impute an empty series")
    if not series[0].observed or not series[-1].observed:
        raise ValidationError("cannot impute outside the observed range (first and last entries must be observed)")
    known = np.array([i for i, entry in enumerate(series) if entry.observed])
    if known.size < 2:
        raise ValidationError("cannot impute with fewer than 2 observed entries")
    gaps = np.array([i for i, entry in enumerate(series) if not entry.observed])
    if gaps.size == 0:
        return list(series)

    filled = {}
    for k, column in enumerate(SENTIMENT_COLUMNS):
        y = np.array([series[i].values()[k] for i in known], dtype=float)
        filled[column] = np.clip(natural_spline_fill(known, y, gaps), 0.0, 1.0)

    out = list(series)
    for j, i in enumerate(gaps):
        out[i] = replace(
            series[i],
            positive=float(filled["positive"][j]),
            negative=float(filled["negative"][j]),
            neutral=float(filled["neutral"][j]),
            observed=True,
        )
    logger.info("Imputed %d of %d days with a natural cubic spline", gaps.size, len(series))
    return out


def equalize_coverage(general, executive_dates):
    """Drop general posts on days that have no executive post."""
    allowed = set(executive_dates)
    return [post for post in general if post.date in allowed]


def sentiment_matrix(series):
    """(n, 3) array of the three channels; NaN where unobserved."""
    return np.array(
        [[np.nan if v is None else v for v in entry.values()] for entry in series],
        dtype=float,
    ).reshape(len(series), len(SENTIMENT_COLUMNS))

