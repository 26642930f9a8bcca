"""Word tokenizer used everywhere in the package.

Lowercases, splits punctuation into separate tokens, and splits the common
English contractions so "don't" becomes ["do", "n't"]. Idempotent on its own
output: tokenize(" ".join(tokens)) == tokens.
"""

from __future__ import annotations

import re

_CONTRACTION_NT = re.compile(r"n't\b")
_CONTRACTION_TAIL = re.compile(r"'(s|re|ve|ll|d|m)\b")
_TOKEN = re.compile(r"n't|'(?:s|re|ve|ll|d|m)|\w+|[^\w\s]")


def tokenize(text: str, lower: bool = True) -> list[str]:
    if lower:
        text = text.lower()
    # space the contractions out first so \w+ cannot swallow their stems
    text = _CONTRACTION_NT.sub(" n't", text)
    text = _CONTRACTION_TAIL.sub(r" '\1", text)
    return _TOKEN.findall(text)


def has_word_chars(token: str) -> bool:
    """True for tokens that carry at least one letter or digit."""
    return any(c.isalnum() for c in token)
