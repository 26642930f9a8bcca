"""Text substrate: tokenization, embeddings, similarity, lexicons, tagging."""

from chorus.text.embeddings import EmbeddingStore
from chorus.text.entities import EntityTag, EntityTagger, load_gazetteers
from chorus.text.heuristics import (
    classify_message_types,
    is_generic,
    sentiment_label,
    sentiment_score,
)
from chorus.text.lexicons import Lexicons, load_lexicons
from chorus.text.similarity import cosine_sim, extrema_sim, greedy_match_sim
from chorus.text.tokenize import tokenize

__all__ = [
    "EmbeddingStore",
    "EntityTag",
    "EntityTagger",
    "Lexicons",
    "classify_message_types",
    "cosine_sim",
    "extrema_sim",
    "greedy_match_sim",
    "is_generic",
    "load_gazetteers",
    "load_lexicons",
    "sentiment_label",
    "sentiment_score",
    "tokenize",
]
