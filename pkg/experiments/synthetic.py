"""
Synthetic planted-sentiment market
----------------------------------
A daily latent mood s_t in [0.15, 0.85] drives both the posts of day t and
the next close:

    close_{t+1} = mu + phi (close_t - mu) + beta (s_t - 0.5) + N(0, 1)

Bars exist on business days; posts on every calendar day (3-8 per day, some
by executive handles). Each post gets three logits whose softmax puts about
s_t on "positive", and a text made of lexicon words in the same proportion,
so both the lexicon and the external scoring paths can recover s_t.
"""

import json
import logging
import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from core.errors import ValidationError
from core.io import write_text_atomic
from ingest.ohlcv import DailyBar, serialize_ohlcv
from ingest.posts import Platform, PostRecord, write_posts

logger = logging.getLogger(__name__)

POSITIVE_WORDS = ("bullish", "rally", "gains", "profit", "strong", "surge", "beat", "upgrade", "optimistic", "soaring")
NEGATIVE_WORDS = ("bearish", "crash", "losses", "weak", "plunge", "dump", "miss", "downgrade", "panic", "overvalued")
FILLER_WORDS = ("stock", "today", "market", "shares", "chart", "earnings", "price", "week", "trading", "company")
EXECUTIVE_HANDLES = ("ceo_alpha", "cfo_beta", "founder_gamma", "chair_delta")

MU = 100.0
PHI = 0.95
BETA = 20.0


@dataclass(frozen=True)
class SyntheticMarket:
    bars: list
    posts: list
    logits: dict
    executives: tuple
    mood: pd.Series


def _mood(rng, days):
    return np.clip(0.5 + 0.2 * rng.standard_normal(days), 0.15, 0.85)


def _post_text(rng, s):
    words = []
    for _ in range(int(rng.integers(4, 8))):
        if rng.random() < 0.6:
            pool = POSITIVE_WORDS if rng.random() < s else NEGATIVE_WORDS
        else:
            pool = FILLER_WORDS
        words.append(pool[int(rng.integers(len(pool)))])
    return " ".join(words)


def _post_logits(rng, s):
    probs = np.array([s, 0.7 * (1.0 - s), 0.3 * (1.0 - s)])
    return [float(v) for v in np.log(probs) + 0.05 * rng.standard_normal(3)]


def generate_synthetic_market(days=250, seed=7, start="2021-01-04", executive_rate=0.6):
    """Bars over `days` business days plus posts for every calendar day in that span."""
    if days < 10:
        raise ValidationError(f"synthetic market needs at least 10 days, got {days}")
    rng = np.random.default_rng(seed)
    trading = pd.bdate_range(start=start, periods=days)
    calendar = pd.date_range(trading[0], trading[-1], freq="D")
    mood = pd.Series(_mood(rng, len(calendar)), index=calendar)

    bars = []
    close = MU
    for i, day in enumerate(trading):
        if i > 0:
            prev_mood = mood[trading[i - 1]]
            close = MU + PHI * (close - MU) + BETA * (prev_mood - 0.5) + rng.standard_normal()
        open_ = close + 0.5 * rng.standard_normal()
        high = max(open_, close) + abs(rng.standard_normal())
        low = min(open_, close) - abs(rng.standard_normal())
        volume = int(rng.integers(1_000_000, 5_000_000))
        bars.append(DailyBar(day.date(), round(open_, 4), round(high, 4), round(low, 4), round(close, 4), volume))

    posts, logits = [], {}
    for day in calendar:
        s = float(mood[day])
        authors = [f"user_{int(rng.integers(1000)):04d}" for _ in range(int(rng.integers(3, 9)))]
        if rng.random() < executive_rate:
            authors[0] = EXECUTIVE_HANDLES[int(rng.integers(len(EXECUTIVE_HANDLES)))]
        for author in authors:
            post_id = f"p{len(posts):07d}"
            posts.append(PostRecord(post_id, day.date(), author, _post_text(rng, s), Platform.TWITTER))
            logits[post_id] = _post_logits(rng, s)

    logger.info("Generated synthetic market: %d bars, %d posts (seed %d)", len(bars), len(posts), seed)
    return SyntheticMarket(bars, posts, logits, EXECUTIVE_HANDLES, mood)


def write_synthetic_market(market, directory):
    """ohlcv.csv, posts.jsonl, scores.jsonl and executives.txt; returns their paths."""
    os.makedirs(directory, exist_ok=True)
    paths = {
        "ohlcv": os.path.join(directory, "ohlcv.csv"),
        "posts": os.path.join(directory, "posts.jsonl"),
        "scores": os.path.join(directory, "scores.jsonl"),
        "executives": os.path.join(directory, "executives.txt"),
    }
    serialize_ohlcv(market.bars, paths["ohlcv"])
    write_posts(market.posts, paths["posts"])
    rows = [json.dumps({"id": post_id, "logits": values}) for post_id, values in market.logits.items()]
    write_text_atomic(paths["scores"], "\n".join(rows) + "\n")
    write_text_atomic(paths["executives"], "# synthetic executive handles\n" + "\n".join(market.executives) + "\n")
    return paths
