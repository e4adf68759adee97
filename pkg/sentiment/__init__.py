from sentiment.external import attach_external_scores, parse_external_scores, softmax_normalize, write_scored_posts
from sentiment.lexicon import (
    Lexicon,
    ScoredPost,
    ScoreSource,
    SentimentScore,
    lexicon_score,
    load_lexicon,
    score_posts,
    tokenize,
)
