"""
OHLCV history loader
--------------------
Reads Yahoo Finance daily CSV exports:

    Date,Open,High,Low,Close,Adj Close,Volume

Adj Close is read and dropped; only open/high/low/close/volume are features.
"""

import io
import logging
import re
from dataclasses import dataclass
from datetime import date

import numpy as np
import pandas as pd

from core.errors import FormatError, ParseError, ValidationError
from core.io import read_text_lines, write_csv_atomic

logger = logging.getLogger(__name__)

OHLCV_HEADER = ["Date", "Open", "High", "Low", "Close", "Adj Close", "Volume"]
PRICE_FIELDS = ("open", "high", "low", "close")


@dataclass(frozen=True)
class DailyBar:
    """One trading day of a single ticker."""

    date: date
    open: float
    high: float
    low: float
    close: float
    volume: int

    def check(self):
        """Raise ValidationError naming the date and field that breaks a bar invariant."""
        for field in PRICE_FIELDS:
            if not getattr(self, field) > 0:
                raise ValidationError(f"{self.date}: '{field}' must be positive, got {getattr(self, field)}")
        if self.volume < 0:
            raise ValidationError(f"{self.date}: 'volume' must be non-negative, got {self.volume}")
        if self.low > min(self.open, self.close):
            raise ValidationError(f"{self.date}: 'low' {self.low} is above min(open, close)")
        if self.high < max(self.open, self.close):
            raise ValidationError(f"{self.date}: 'high' {self.high} is below max(open, close)")
        if self.low > self.high:
            raise ValidationError(f"{self.date}: 'low' {self.low} is above 'high' {self.high}")


def parse_ohlcv(path):
    """Load a Yahoo-layout CSV into a date-sorted list of DailyBar."""
    text = "".join(line for _, line in read_text_lines(path)).lstrip("\ufeff")
    header = text.split("\n", 1)[0].strip()
    if header.split(",") != OHLCV_HEADER:
        raise FormatError(f"expected header '{','.join(OHLCV_HEADER)}', got '{header}'", path=path, line=1)

    try:
        raw = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False, skip_blank_lines=True)
    except pd.errors.ParserError as exc:
        # "Expected 7 fields in line 3, saw 8"
        found = re.search(r"fields in line (\d+), saw (\d+)", str(exc))
        if found is None:
            raise FormatError(f"unreadable CSV: {exc}", path=path) from exc
        raise FormatError(f"expected {len(OHLCV_HEADER)} fields, saw {found.group(2)}",
                          path=path, line=int(found.group(1))) from exc
    if raw.empty:
        return []

    # data row i sits on file line i + 2
    lines = np.arange(len(raw)) + 2
    dates = pd.to_datetime(raw["Date"].str.strip(), format="%Y-%m-%d", errors="coerce")
    bad = dates.isna().to_numpy()
    if bad.any():
        i = int(np.argmax(bad))
        raise ParseError(f"not a YYYY-MM-DD date: '{raw['Date'].iloc[i]}'", path=path, line=int(lines[i]), field="Date")

    numbers = {}
    for column in ["Open", "High", "Low", "Close", "Adj Close", "Volume"]:
        values = pd.to_numeric(raw[column].str.strip(), errors="coerce")
        bad = (values.isna() | ~np.isfinite(values.fillna(0.0))).to_numpy()
        if bad.any():
            i = int(np.argmax(bad))
            raise ParseError(f"not a number: '{raw[column].iloc[i]}'", path=path, line=int(lines[i]), field=column)
        numbers[column] = values.to_numpy(dtype=float)

    volume = numbers["Volume"]
    fractional = volume != np.floor(volume)
    if fractional.any():
        i = int(np.argmax(fractional))
        raise ParseError(f"volume must be a whole count: '{raw['Volume'].iloc[i]}'",
                         path=path, line=int(lines[i]), field="Volume")

    bars = []
    for i in range(len(raw)):
        bar = DailyBar(
            date=dates.iloc[i].date(),
            open=float(numbers["Open"][i]),
            high=float(numbers["High"][i]),
            low=float(numbers["Low"][i]),
            close=float(numbers["Close"][i]),
            volume=int(volume[i]),
        )
        bar.check()
        bars.append(bar)

    bars.sort(key=lambda b: b.date)
    for prev, cur in zip(bars, bars[1:]):
        if prev.date == cur.date:
            raise ValidationError(f"{cur.date}: duplicate 'date' in {path}")

    logger.info("Loaded %d bars from %s (%s to %s)", len(bars), path, bars[0].date, bars[-1].date)
    return bars


def bars_to_frame(bars):
    """DataFrame view of a bar sequence, indexed by date."""
    frame = pd.DataFrame(
        {
            "open": [b.open for b in bars],
            "high": [b.high for b in bars],
            "low": [b.low for b in bars],
            "close": [b.close for b in bars],
            "volume": [float(b.volume) for b in bars],
        },
        index=pd.DatetimeIndex([pd.Timestamp(b.date) for b in bars], name="date"),
    )
    return frame


def serialize_ohlcv(bars, path):
    """Write bars back in the Yahoo layout (Adj Close = Close)."""
    frame = pd.DataFrame(
        {
            "Date": [b.date.isoformat() for b in bars],
            "Open": [b.open for b in bars],
            "High": [b.high for b in bars],
            "Low": [b.low for b in bars],
            "Close": [b.close for b in bars],
            "Adj Close": [b.close for b in bars],
            "Volume": [b.volume for b in bars],
        },
        columns=OHLCV_HEADER,
    )
    write_csv_atomic(path, frame, index=False)


def summarize_bars(bars):
    """Data quality checks, same set the download script used to print."""
    if not bars:
        return {"rows": 0}
    frame = bars_to_frame(bars)
    return {
        "rows": len(frame),
        "start": bars[0].date.isoformat(),
        "end": bars[-1].date.isoformat(),
        "duplicate_dates": int(frame.index.duplicated().sum()),
        "non_positive_prices": int((frame[list(PRICE_FIELDS)] <= 0).any(axis=1).sum()),
        "zero_volume_days": int((frame["volume"] == 0).sum()),
        "highest_close": float(frame["close"].max()),
        "lowest_close": float(frame["close"].min()),
        "latest_close": float(frame["close"].iloc[-1]),
    }
