"""Cheap message-level signals: type labels, sentiment, genericness."""

from __future__ import annotations

from chorus.text.lexicons import Lexicons
from chorus.text.tokenize import has_word_chars, tokenize

MESSAGE_TYPES = ("greeting", "question", "affirmative", "negative", "request", "politic")

_CLAUSE_BREAKS = {".", "!", "?", ";", ","}

SENTIMENT_NEUTRAL_BAND = 0.05
_NEGATION_WINDOW = 3


def classify_message_types(text: str, lexicons: Lexicons) -> set[str]:
    """Subset of MESSAGE_TYPES that apply; a message can carry several."""
    tokens = tokenize(text)
    token_set = set(tokens)
    types: set[str] = set()
    if token_set & lexicons.greeting_words:
        types.add("greeting")
    if "?" in token_set or _wh_leads_clause(tokens, lexicons):
        types.add("question")
    if token_set & lexicons.affirmative_words:
        types.add("affirmative")
    if token_set & lexicons.negative_words:
        types.add("negative")
    if token_set & lexicons.request_words:
        types.add("request")
    if token_set & lexicons.politic_words:
        types.add("politic")
    return types


def _wh_leads_clause(tokens: list[str], lexicons: Lexicons) -> bool:
    at_clause_start = True
    for tok in tokens:
        if at_clause_start and tok in lexicons.wh_words:
            return True
        at_clause_start = tok in _CLAUSE_BREAKS
    return False


def sentiment_score(text: str, lexicons: Lexicons) -> float:
    """Mean polarity of lexicon tokens, sign-flipped after a nearby negation.

    A negation within the three tokens before a polar word flips it, so
    "not good" scores negative. Messages without any polar token score 0.
    """
    tokens = tokenize(text)
    values = []
    for i, tok in enumerate(tokens):
        polarity = lexicons.sentiment_polarity.get(tok)
        if polarity is None:
            continue
        window = tokens[max(0, i - _NEGATION_WINDOW) : i]
        if any(w in lexicons.negations for w in window):
            polarity = -polarity
        values.append(polarity)
    if not values:
        return 0.0
    return sum(values) / len(values)


def sentiment_label(text: str, lexicons: Lexicons) -> str:
    score = sentiment_score(text, lexicons)
    if score > SENTIMENT_NEUTRAL_BAND:
        return "positive"
    if score < -SENTIMENT_NEUTRAL_BAND:
        return "negative"
    return "neutral"


def is_generic(text: str, lexicons: Lexicons) -> bool:
    """True when the message carries no content: every word is a stop word or
    shorter than three characters. Punctuation-only messages count as generic.
    """
    words = [t for t in tokenize(text) if has_word_chars(t)]
    if not words:
        return True
    return all(w in lexicons.stop_words or len(w) < 3 for w in words)
