"""
Social-media post dumps
-----------------------
Posts arrive as JSONL, one object per line:

    {"id": "1", "date": "2021-04-15T09:30:00Z", "user": "a", "text": "TSLA up",
     "platform": "twitter", "subreddit": null, "upvotes": 12}

Pipeline: parse_posts -> dedup_posts -> partition_posts (Twitter, by author
handle) or partition_reddit_posts (Reddit, by subreddit) -> under-sampled
general posts.
"""

import json
import logging
from dataclasses import dataclass, replace
from datetime import date
from enum import Enum

import numpy as np
import pandas as pd

from core.errors import FormatError, ParseError, ValidationError
from core.io import read_text_lines, write_text_atomic

logger = logging.getLogger(__name__)

REQUIRED_KEYS = ("id", "date", "user", "text", "platform")
OPTIONAL_KEYS = ("subreddit", "upvotes", "category")


class Platform(str, Enum):
    TWITTER = "twitter"
    REDDIT = "reddit"


class Category(str, Enum):
    EXECUTIVE = "executive"
    GENERAL = "general"
    UNASSIGNED = "unassigned"


@dataclass(frozen=True)
class PostRecord:
    id: str
    date: date
    author: str
    text: str
    platform: Platform
    category: Category = Category.UNASSIGNED
    upvotes: int | None = None
    subreddit: str | None = None


@dataclass(frozen=True)
class HandleList:
    """Lowercase author handles (or subreddit names) that mark executive posts."""

    handles: frozenset

    def __post_init__(self):
        if not self.handles:
            raise ValidationError("handle list is empty")
        for handle in self.handles:
            if not handle or handle != handle.lower() or any(ch.isspace() for ch in handle):
                raise ValidationError(f"invalid handle '{handle}': must be lowercase with no whitespace")

    def __contains__(self, name):
        return name is not None and name.lower() in self.handles

    def __len__(self):
        return len(self.handles)


def parse_handle_list(path):
    """One handle per line; '#' comment lines and blank lines skipped, '@' stripped."""
    handles = set()
    for line_no, line in read_text_lines(path):
        entry = line.strip()
        if not entry or entry.startswith("#"):
            continue
        entry = entry.lstrip("@").lower()
        if any(ch.isspace() for ch in entry):
            raise FormatError(f"handle contains whitespace: '{entry}'", path=path, line=line_no)
        handles.add(entry)
    if not handles:
        raise ValidationError(f"{path}: handle list is empty")
    return HandleList(frozenset(handles))


def _post_date(value, path, line_no):
    try:
        stamp = pd.Timestamp(str(value))
    except (ValueError, TypeError) as exc:
        raise ParseError(f"not a date or timestamp: '{value}'", path=path, line=line_no, field="date") from exc
    if pd.isna(stamp):
        raise ParseError(f"not a date or timestamp: '{value}'", path=path, line=line_no, field="date")
    # truncate in the timestamp's own zone, no conversion
    return stamp.date()


def parse_posts(path):
    """Load a posts JSONL file. Every record starts Unassigned (unless the file carries a category)."""
    posts = []
    seen = {}
    for line_no, line in read_text_lines(path):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", path=path, line=line_no) from exc
        if not isinstance(obj, dict):
            raise FormatError("expected a JSON object", path=path, line=line_no)
        missing = [key for key in REQUIRED_KEYS if key not in obj or obj[key] is None]
        if missing:
            raise FormatError(f"missing required key(s): {', '.join(missing)}", path=path, line=line_no)

        post_id = str(obj["id"])
        if post_id in seen:
            raise ValidationError(f"{path}:{line_no}: duplicate post id '{post_id}' (first seen on line {seen[post_id]})")
        seen[post_id] = line_no

        for key in ("text", "user"):
            if not isinstance(obj[key], str):
                raise ParseError(f"expected a string, got {type(obj[key]).__name__}", path=path, line=line_no, field=key)
        text = obj["text"]
        if not text.strip():
            raise ValidationError(f"{path}:{line_no}: post '{post_id}' has empty text")

        try:
            platform = Platform(str(obj["platform"]).strip().lower())
        except ValueError as exc:
            raise ParseError(f"unknown platform '{obj['platform']}'", path=path, line=line_no, field="platform") from exc

        upvotes = obj.get("upvotes")
        if upvotes is not None:
            if isinstance(upvotes, bool) or not isinstance(upvotes, int) or upvotes < 0:
                raise ParseError(f"upvotes must be a non-negative integer, got {upvotes!r}",
                                 path=path, line=line_no, field="upvotes")

        category = Category.UNASSIGNED
        if obj.get("category") is not None:
            try:
                category = Category(str(obj["category"]).lower())
            except ValueError as exc:
                raise ParseError(f"unknown category '{obj['category']}'", path=path, line=line_no, field="category") from exc

        subreddit = obj.get("subreddit")
        posts.append(
            PostRecord(
                id=post_id,
                date=_post_date(obj["date"], path, line_no),
                author=obj["user"],
                text=text,
                platform=platform,
                category=category,
                upvotes=upvotes,
                subreddit=str(subreddit) if subreddit is not None else None,
            )
        )
    logger.info("Parsed %d posts from %s", len(posts), path)
    return posts


def write_posts(posts, path):
    lines = []
    for post in posts:
        record = {
            "id": post.id,
            "date": post.date.isoformat(),
            "user": post.author,
            "text": post.text,
            "platform": post.platform.value,
            "category": post.category.value,
        }
        if post.subreddit is not None:
            record["subreddit"] = post.subreddit
        if post.upvotes is not None:
            record["upvotes"] = post.upvotes
        lines.append(json.dumps(record, ensure_ascii=False))
    write_text_atomic(path, "\n".join(lines) + ("\n" if lines else ""))


def dedup_posts(posts):
    """Keep only the earliest post per (author, trimmed text); order otherwise unchanged."""
    earliest = {}
    for i, post in enumerate(posts):
        key = (post.author, post.text.strip())
        if key not in earliest or post.date < posts[earliest[key]].date:
            earliest[key] = i
    keep = set(earliest.values())
    kept = [post for i, post in enumerate(posts) if i in keep]
    if len(kept) < len(posts):
        logger.info("Dropped %d duplicate posts", len(posts) - len(kept))
    return kept


def _sample_general(general, sample_size, seed):
    if sample_size is None:
        return general
    if sample_size <= 0:
        raise ValidationError(f"sample_size must be positive, got {sample_size}")
    if len(general) <= sample_size:
        return general
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(len(general), size=sample_size, replace=False))
    logger.info("Under-sampled general posts: %d -> %d", len(general), sample_size)
    return [general[i] for i in chosen]


def _split(posts, is_executive, sample_size, seed):
    if sample_size is not None and sample_size <= 0:
        raise ValidationError(f"sample_size must be positive, got {sample_size}")
    executive, general = [], []
    for post in posts:
        if is_executive(post):
            executive.append(replace(post, category=Category.EXECUTIVE))
        else:
            general.append(replace(post, category=Category.GENERAL))
    return executive, _sample_general(general, sample_size, seed)


def partition_posts(posts, executives, sample_size=None, seed=0):
    """Split by author handle (case-insensitive); under-sample the general side only."""
    return _split(posts, lambda post: post.author in executives, sample_size, seed)


def partition_reddit_posts(posts, executive_subreddits, sample_size=None, seed=0):
    """Split Reddit posts by subreddit: listed subreddits are executive (E_r), the rest general (G_r)."""
    return _split(posts, lambda post: post.subreddit in executive_subreddits, sample_size, seed)
