"""
Rule-based lexicon scorer
-------------------------
A trimmed-down VADER: lexicon lookup, a 3-token negation window, booster
scaling and the alpha=15 compound normalization. No punctuation emphasis,
capitalisation or "but" handling.

Lexicon file (TSV):

    good<TAB>1.9
    bad<TAB>-2.5
    #NEGATORS
    not
    never
    #BOOSTERS
    very<TAB>0.293
    slightly<TAB>-0.293
"""

import logging
import math
import string
from dataclasses import dataclass
from enum import Enum

from core.errors import FormatError, ValidationError
from core.io import read_text_lines

logger = logging.getLogger(__name__)

ALPHA = 15.0
NEGATION_WINDOW = 3
MAX_VALENCE = 4.0
PUNCTUATION = string.punctuation + "“”‘’…"


class ScoreSource(str, Enum):
    LEXICON = "lexicon"
    EXTERNAL = "external"


@dataclass(frozen=True)
class SentimentScore:
    positive: float
    negative: float
    neutral: float
    source: ScoreSource
    compound: float | None = None

    def __post_init__(self):
        for name in ("positive", "negative", "neutral"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"sentiment '{name}' out of [0, 1]: {value}")
        if self.source is ScoreSource.EXTERNAL:
            total = self.positive + self.negative + self.neutral
            if abs(total - 1.0) > 1e-9:
                raise ValidationError(f"external scores must sum to 1, got {total}")
        if self.compound is not None and not -1.0 <= self.compound <= 1.0:
            raise ValidationError(f"compound out of [-1, 1]: {self.compound}")

    def as_tuple(self):
        return (self.positive, self.negative, self.neutral)


@dataclass(frozen=True)
class ScoredPost:
    post: object
    score: SentimentScore

    @property
    def date(self):
        return self.post.date


@dataclass(frozen=True)
class Lexicon:
    entries: dict
    negators: frozenset = frozenset()
    boosters: dict = None

    def __post_init__(self):
        if self.boosters is None:
            object.__setattr__(self, "boosters", {})
        for token, valence in self.entries.items():
            _check_token(token)
            if not math.isfinite(valence) or abs(valence) > MAX_VALENCE:
                raise ValidationError(f"valence for '{token}' must be finite and within [-4, 4], got {valence}")
        for token in self.negators:
            _check_token(token)
        for token, increment in self.boosters.items():
            _check_token(token)
            # increments at or below -1 would flip or zero the valence
            if not math.isfinite(increment) or increment <= -1.0:
                raise ValidationError(f"booster '{token}' increment must be finite and > -1, got {increment}")


def _check_token(token):
    if not token or token != token.lower():
        raise ValidationError(f"lexicon token must be lowercase and non-empty, got '{token}'")


def load_lexicon(path):
    entries, negators, boosters = {}, set(), {}
    section = "entries"
    for line_no, raw in read_text_lines(path):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        if line.strip() == "#NEGATORS":
            section = "negators"
            continue
        if line.strip() == "#BOOSTERS":
            section = "boosters"
            continue
        if line.startswith("#"):
            continue
        if section == "negators":
            negators.add(line.strip().lower())
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise FormatError("expected 'token<TAB>value'", path=path, line=line_no)
        token = parts[0].strip().lower()
        try:
            value = float(parts[1])
        except ValueError as exc:
            raise FormatError(f"not a number: '{parts[1]}'", path=path, line=line_no) from exc
        if section == "entries":
            entries[token] = value
        else:
            boosters[token] = value
    logger.info("Lexicon %s: %d entries, %d negators, %d boosters", path, len(entries), len(negators), len(boosters))
    return Lexicon(entries=entries, negators=frozenset(negators), boosters=boosters)


def tokenize(text):
    """Whitespace split, strip surrounding punctuation, lowercase; empty tokens dropped."""
    tokens = []
    for raw in text.split():
        token = raw.strip(PUNCTUATION).lower()
        if token:
            tokens.append(token)
    return tokens


def normalize(score, alpha=ALPHA):
    return score / math.sqrt(score * score + alpha)


def lexicon_score(text, lexicon):
    if not text or not text.strip():
        raise ValidationError("cannot score empty text")

    tokens = tokenize(text)
    adjusted = []
    unmatched = 0
    for i, token in enumerate(tokens):
        if token not in lexicon.entries:
            unmatched += 1
            continue
        valence = lexicon.entries[token]
        if i > 0 and tokens[i - 1] in lexicon.boosters:
            valence *= 1.0 + lexicon.boosters[tokens[i - 1]]
        if any(t in lexicon.negators for t in tokens[max(0, i - NEGATION_WINDOW):i]):
            valence = -valence
        adjusted.append(valence)

    total = sum(adjusted)
    compound = normalize(total) if adjusted else 0.0
    pos_mass = sum(v for v in adjusted if v > 0)
    neg_mass = -sum(v for v in adjusted if v < 0)
    mass = pos_mass + neg_mass + unmatched
    if mass == 0:
        return SentimentScore(positive=0.0, negative=0.0, neutral=1.0, compound=compound, source=ScoreSource.LEXICON)
    positive = pos_mass / mass
    negative = neg_mass / mass
    neutral = 1.0 - positive - negative
    return SentimentScore(
        positive=positive,
        negative=negative,
        neutral=min(1.0, max(0.0, neutral)),
        compound=max(-1.0, min(1.0, compound)),
        source=ScoreSource.LEXICON,
    )


def score_posts(posts, lexicon):
    return [ScoredPost(post=post, score=lexicon_score(post.text, lexicon)) for post in posts]
