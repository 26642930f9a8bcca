"""Hand-crafted feature vector for a (article, context, candidate) triple.

The layout is fixed by the manifest below: three average-embedding blocks,
six similarity scalars, eight overlap counts, binary word-category and
message-type flags, length counts, and sentiment one-hots for the candidate
and the previous user message. The manifest (not any constant written down
elsewhere) is the source of truth for the dimensionality; it travels with
every trained checkpoint so scorers can refuse mismatched extractors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from chorus.core import Article, ConversationState, Message
from chorus.text.embeddings import EmbeddingStore
from chorus.text.entities import EntityTagger
from chorus.text.heuristics import (
    MESSAGE_TYPES,
    classify_message_types,
    is_generic,
    sentiment_label,
)
from chorus.text.lexicons import Lexicons
from chorus.text.similarity import cosine_sim, extrema_sim, greedy_match_sim
from chorus.text.tokenize import has_word_chars, tokenize

_SENTIMENT_ORDER = ("negative", "neutral", "positive")
_CATEGORY_NAMES = ("wh_prefix", "intensifier", "confusion", "profanity", "negation")


@dataclass(frozen=True)
class ManifestBlock:
    name: str
    start: int
    length: int


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    manifest: tuple[ManifestBlock, ...]

    def block(self, name: str) -> np.ndarray:
        for b in self.manifest:
            if b.name == name:
                return self.values[b.start : b.start + b.length]
        raise KeyError(name)


def _build_manifest(dim: int) -> tuple[ManifestBlock, ...]:
    spec: list[tuple[str, int]] = [
        ("avg_embedding_candidate", dim),
        ("avg_embedding_context", dim),
        ("avg_embedding_article", dim),
        ("sim_candidate_context", 3),
        ("sim_candidate_article", 3),
        ("overlap_candidate_context", 4),
        ("overlap_candidate_article", 4),
        ("generic_flags", 2),
        ("word_category_candidate", len(_CATEGORY_NAMES)),
        ("word_category_last_user", len(_CATEGORY_NAMES)),
        ("context_length", 1),
        ("article_sentence_count", 1),
        ("word_count_candidate", 1),
        ("word_count_last_user", 1),
        ("types_candidate", len(MESSAGE_TYPES)),
        ("types_last_user", len(MESSAGE_TYPES)),
        ("sentiment_candidate", len(_SENTIMENT_ORDER)),
        ("sentiment_last_user", len(_SENTIMENT_ORDER)),
    ]
    blocks = []
    offset = 0
    for name, length in spec:
        blocks.append(ManifestBlock(name, offset, length))
        offset += length
    return tuple(blocks)


class FeatureExtractor:
    def __init__(self, store: EmbeddingStore, lexicons: Lexicons, tagger: EntityTagger):
        self.store = store
        self.lexicons = lexicons
        self.tagger = tagger
        self._manifest = _build_manifest(store.dimension)
        self.dimension = self._manifest[-1].start + self._manifest[-1].length
        self._article_cache: dict[str, tuple[list[str], set[str], int]] = {}

    def manifest(self) -> tuple[ManifestBlock, ...]:
        return self._manifest

    def manifest_dict(self) -> dict:
        """JSON-ready manifest, stored inside checkpoints for compatibility checks."""
        return {
            "dimension": self.dimension,
            "embedding_dim": self.store.dimension,
            "blocks": [[b.name, b.start, b.length] for b in self._manifest],
        }

    def extract(self, state: ConversationState, candidate_text: str) -> FeatureVector:
        return self.extract_parts(state.article, state.history, candidate_text)

    def extract_parts(
        self,
        article: Article,
        context: Sequence[Message],
        candidate_text: str,
    ) -> FeatureVector:
        if not candidate_text.strip():
            raise ValueError("candidate text must be non-empty")
        lex = self.lexicons
        cand_tokens = tokenize(candidate_text)
        context_tokens: list[str] = []
        for m in context:
            context_tokens.extend(tokenize(m.text))
        article_tokens, article_entities, article_sentences = self._article_parts(article)
        last_user = _last_human(context)

        values = np.zeros(self.dimension, dtype=np.float64)
        out = _Writer(values, self._manifest)

        out.put("avg_embedding_candidate", self.store.avg(cand_tokens))
        out.put("avg_embedding_context", self.store.avg(context_tokens))
        out.put("avg_embedding_article", self.store.avg(article_tokens))

        out.put("sim_candidate_context", self._sims(cand_tokens, context_tokens))
        out.put("sim_candidate_article", self._sims(cand_tokens, article_tokens))

        cand_entities = _entity_surfaces(self.tagger, [candidate_text])
        ctx_entities = _entity_surfaces(self.tagger, [m.text for m in context])
        out.put(
            "overlap_candidate_context",
            self._overlaps(cand_tokens, context_tokens, cand_entities, ctx_entities),
        )
        out.put(
            "overlap_candidate_article",
            self._overlaps(cand_tokens, article_tokens, cand_entities, article_entities),
        )

        out.put(
            "generic_flags",
            [
                float(is_generic(candidate_text, lex)),
                float(is_generic(last_user.text, lex)) if last_user else 0.0,
            ],
        )
        out.put("word_category_candidate", _category_flags(cand_tokens, lex))
        out.put(
            "word_category_last_user",
            _category_flags(tokenize(last_user.text), lex) if last_user else [0.0] * 5,
        )

        out.put("context_length", [float(len(context))])
        out.put("article_sentence_count", [float(article_sentences)])
        out.put("word_count_candidate", [float(_word_count(cand_tokens))])
        out.put(
            "word_count_last_user",
            [float(_word_count(tokenize(last_user.text)))] if last_user else [0.0],
        )

        out.put("types_candidate", _type_flags(candidate_text, lex))
        out.put(
            "types_last_user",
            _type_flags(last_user.text, lex) if last_user else [0.0] * len(MESSAGE_TYPES),
        )
        out.put("sentiment_candidate", _sentiment_one_hot(candidate_text, lex))
        out.put(
            "sentiment_last_user",
            _sentiment_one_hot(last_user.text, lex) if last_user else [0.0] * 3,
        )
        return FeatureVector(values=values, manifest=self._manifest)

    def _sims(self, cand: list[str], other: list[str]) -> list[float]:
        return [
            cosine_sim(self.store.avg(cand), self.store.avg(other)),
            extrema_sim(cand, other, self.store),
            greedy_match_sim(cand, other, self.store),
        ]

    def _overlaps(
        self,
        cand_tokens: list[str],
        other_tokens: list[str],
        cand_entities: set[str],
        other_entities: set[str],
    ) -> list[float]:
        lex = self.lexicons
        content_a = set(lex.content_tokens(cand_tokens))
        content_b = set(lex.content_tokens(other_tokens))
        words_a = [t for t in cand_tokens if has_word_chars(t)]
        words_b = [t for t in other_tokens if has_word_chars(t)]
        return [
            float(len(content_a & content_b)),
            float(len(_ngrams(words_a, 2) & _ngrams(words_b, 2))),
            float(len(_ngrams(words_a, 3) & _ngrams(words_b, 3))),
            float(len(cand_entities & other_entities)),
        ]

    def _article_parts(self, article: Article) -> tuple[list[str], set[str], int]:
        cached = self._article_cache.get(article.article_id)
        if cached is not None:
            return cached
        parts = (
            tokenize(article.text),
            _entity_surfaces(self.tagger, [article.text]),
            len(article.sentences),
        )
        if len(self._article_cache) > 64:
            self._article_cache.clear()
        self._article_cache[article.article_id] = parts
        return parts


class _Writer:
    def __init__(self, values: np.ndarray, manifest: tuple[ManifestBlock, ...]):
        self.values = values
        self.blocks = {b.name: b for b in manifest}

    def put(self, name: str, block_values) -> None:
        b = self.blocks[name]
        arr = np.asarray(block_values, dtype=np.float64)
        if arr.shape != (b.length,):
            raise ValueError(f"block {name} expects length {b.length}, got {arr.shape}")
        self.values[b.start : b.start + b.length] = arr


def _last_human(context: Sequence[Message]) -> Optional[Message]:
    for m in reversed(context):
        if m.speaker.value == "human":
            return m
    return None


def _entity_surfaces(tagger: EntityTagger, texts: list[str]) -> set[str]:
    out: set[str] = set()
    for t in texts:
        out.update(tag.surface.lower() for tag in tagger.tag(t))
    return out


def _ngrams(tokens: list[str], n: int) -> set[tuple[str, ...]]:
    return {tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)}


def _word_count(tokens: list[str]) -> int:
    return sum(1 for t in tokens if has_word_chars(t))


def _category_flags(tokens: list[str], lex: Lexicons) -> list[float]:
    token_set = set(tokens)
    return [
        float(any(t.startswith("wh") for t in tokens)),
        float(bool(token_set & lex.intensifiers)),
        float(bool(token_set & lex.confusion_words)),
        float(bool(token_set & lex.profanity)),
        float(bool(token_set & lex.negations)),
    ]


def _type_flags(text: str, lex: Lexicons) -> list[float]:
    present = classify_message_types(text, lex)
    return [float(t in present) for t in MESSAGE_TYPES]


def _sentiment_one_hot(text: str, lex: Lexicons) -> list[float]:
    label = sentiment_label(text, lex)
    return [float(label == s) for s in _SENTIMENT_ORDER]
