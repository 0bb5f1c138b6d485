"""Text analysis pipeline: tokenize, lowercase, stop, stem.

Undocumented analysis choices are the classic source of irreproducible
retrieval results, so the pipeline here is explicit configuration with a
fixed stage order: split on non-alphanumeric code points, truncate
overlong tokens, lowercase, remove stopwords, stem.  The same config must
be applied to documents at index time and to queries at search time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .porter import porter_stem

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

STEMMER_NONE = "none"
STEMMER_PORTER = "porter"

# Longer tokens are truncated to bound dictionary pathology on junk input.
DEFAULT_TOKEN_LENGTH_CAP = 64


@dataclass(frozen=True)
class AnalysisConfig:
    lowercase: bool = True
    stemmer: str = STEMMER_NONE
    stopwords: frozenset[str] = field(default_factory=frozenset)
    token_length_cap: int = DEFAULT_TOKEN_LENGTH_CAP

    def __post_init__(self):
        if self.stemmer not in (STEMMER_NONE, STEMMER_PORTER):
            raise ValueError(f"unknown stemmer {self.stemmer!r}")
        if self.token_length_cap < 1:
            raise ValueError("token_length_cap must be positive")
        object.__setattr__(self, "stopwords", frozenset(self.stopwords))

    def summary(self) -> str:
        return (
            f"lowercase={str(self.lowercase).lower()} stemmer={self.stemmer} "
            f"stopwords={len(self.stopwords)} token_cap={self.token_length_cap}"
        )


DEFAULT_CONFIG = AnalysisConfig()


def analyze(text: str, config: AnalysisConfig = DEFAULT_CONFIG) -> list[str]:
    """Run the full pipeline over ``text``, preserving token order."""
    cap = config.token_length_cap
    tokens = [t[:cap] for t in _TOKEN_RE.findall(text)]
    if config.lowercase:
        tokens = [t.lower() for t in tokens]
    if config.stopwords:
        tokens = [t for t in tokens if t not in config.stopwords]
    if config.stemmer == STEMMER_PORTER:
        tokens = [porter_stem(t) for t in tokens]
    return tokens


def read_stopwords(lines, lowercase: bool = True) -> frozenset[str]:
    """Load a stopword list, one term per line; blank lines are ignored."""
    words = set()
    for line in lines:
        word = line.strip()
        if word:
            words.add(word.lower() if lowercase else word)
    return frozenset(words)
