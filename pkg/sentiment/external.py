"""
Externally computed classifier logits
-------------------------------------
Scores JSONL, one line per post, logits in [positive, negative, neutral] order:

    {"id": "1", "logits": [1.2, -0.4, 0.3]}
"""

import json
import logging

import numpy as np
from scipy.special import softmax

from core.errors import FormatError, ValidationError
from core.io import read_text_lines, write_text_atomic
from sentiment.lexicon import ScoredPost, ScoreSource, SentimentScore

logger = logging.getLogger(__name__)

LOGIT_ORDER = ("positive", "negative", "neutral")


def softmax_normalize(logits):
    values = np.asarray(logits, dtype=float)
    if values.shape != (3,):
        raise ValidationError(f"expected 3 logits {LOGIT_ORDER}, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValidationError(f"logits must be finite, got {list(logits)}")
    # scipy subtracts the max before exponentiating
    probs = softmax(values)
    return tuple(float(p) for p in probs)


def parse_external_scores(path):
    scores = {}
    for line_no, line in read_text_lines(path):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", path=path, line=line_no) from exc
        if not isinstance(obj, dict) or "id" not in obj or "logits" not in obj:
            raise FormatError("expected keys 'id' and 'logits'", path=path, line=line_no)
        logits = obj["logits"]
        if not isinstance(logits, list) or len(logits) != 3:
            raise FormatError("'logits' must be a list of 3 numbers [positive, negative, neutral]",
                              path=path, line=line_no)
        post_id = str(obj["id"])
        if post_id in scores:
            raise ValidationError(f"{path}:{line_no}: duplicate score id '{post_id}'")
        try:
            scores[post_id] = tuple(float(v) for v in logits)
        except (TypeError, ValueError) as exc:
            raise FormatError(f"non-numeric logits {logits!r}", path=path, line=line_no) from exc
    logger.info("Loaded %d external score rows from %s", len(scores), path)
    return scores


def attach_external_scores(posts, scores):
    missing = [post.id for post in posts if post.id not in scores]
    if missing:
        raise ValidationError(f"{len(missing)} post id(s) have no external score: {', '.join(missing)}")
    if posts:
        extra = len(set(scores) - {post.id for post in posts})
        if extra:
            logger.warning("Ignoring %d score rows with no matching post", extra)

    scored = []
    for post in posts:
        positive, negative, neutral = softmax_normalize(scores[post.id])
        scored.append(
            ScoredPost(
                post=post,
                score=SentimentScore(positive=positive, negative=negative, neutral=neutral, source=ScoreSource.EXTERNAL),
            )
        )
    return scored


def write_scored_posts(scored, path):
    lines = []
    for item in scored:
        record = {
            "id": item.post.id,
            "date": item.post.date.isoformat(),
            "category": item.post.category.value,
            "positive": item.score.positive,
            "negative": item.score.negative,
            "neutral": item.score.neutral,
            "source": item.score.source.value,
        }
        if item.score.compound is not None:
            record["compound"] = item.score.compound
        lines.append(json.dumps(record))
    write_text_atomic(path, "\n".join(lines) + ("\n" if lines else ""))
