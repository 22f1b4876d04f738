"""The fixed keyword rule and the all-1s baseline."""

from __future__ import annotations

import numpy as np

from .features import FeatureConfig, tokenize

# The hand-picked disjunction used for the keyword classifier.  Matching is
# exact-token: the list itself contains morphological pairs, so no stemming
# or substring matching is applied.
KEYWORDS = frozenset(
    {
        "option",
        "recommendation",
        "proposal",
        "suggest",
        "suggestion",
        "discuss",
        "discussion",
        "upcoming",
        "alternative",
        "frank",
        "candid",
        "ongoing",
    }
)

_RAW_TOKENS = FeatureConfig(stemmer="none", use_idf=False)


def keyword_predict(text: str) -> int:
    """1 iff any lowercased token of the paragraph equals a keyword."""
    return int(any(token in KEYWORDS for token in tokenize(text, _RAW_TOKENS)))


def keyword_predict_many(texts: list[str]) -> np.ndarray:
    return np.array([keyword_predict(t) for t in texts], dtype=int)


def all_ones_predict_many(texts: list[str]) -> np.ndarray:
    return np.ones(len(texts), dtype=int)
