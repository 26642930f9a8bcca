"""Fact retrieval: the closest stored fact to the conversation so far.

Fact vectors are averaged word embeddings, computed once at load time and
kept as a matrix. At chat time only the conversation history vector is
computed; the fact minimizing cosine distance to it wins, skipping facts
already said in this conversation.
"""

from __future__ import annotations

from pathlib import Path
from typing import AbstractSet, Optional, Sequence

import numpy as np

from chorus.core import Article, ConversationState
from chorus.responders.base import Responder, last_human_text
from chorus.text.embeddings import EmbeddingStore
from chorus.text.heuristics import classify_message_types
from chorus.text.lexicons import Lexicons
from chorus.text.tokenize import tokenize


class FactBase:
    def __init__(self, facts: Sequence[str], store: EmbeddingStore):
        if not facts:
            raise ValueError("fact base needs at least one fact")
        self.facts = tuple(facts)
        self.store = store
        self._matrix = np.stack([store.avg(tokenize(f)) for f in self.facts])
        self._norms = np.linalg.norm(self._matrix, axis=1)

    @classmethod
    def load(cls, path: str | Path, store: EmbeddingStore) -> "FactBase":
        facts = [
            line.strip()
            for line in Path(path).read_text(encoding="utf-8").splitlines()
            if line.strip() and not line.startswith("#")
        ]
        return cls(facts, store)

    def similarities(self, conversation_vec: np.ndarray) -> np.ndarray:
        """Cosine similarity of each fact row with the conversation vector."""
        c_norm = float(np.linalg.norm(conversation_vec))
        sims = np.zeros(len(self.facts))
        if c_norm == 0.0:
            return sims
        ok = self._norms > 0.0
        sims[ok] = (self._matrix[ok] @ conversation_vec) / (self._norms[ok] * c_norm)
        return sims

    def best_unused(
        self, conversation_vec: np.ndarray, used: AbstractSet[int]
    ) -> Optional[int]:
        """Index of the closest fact not in used; ties go to the lowest index."""
        if len(used) >= len(self.facts):
            return None
        sims = self.similarities(conversation_vec)
        order = sorted(range(len(self.facts)), key=lambda i: (-sims[i], i))
        for i in order:
            if i not in used:
                return i
        return None


class FactResponder(Responder):
    name = "fact"

    def __init__(
        self,
        base: FactBase,
        templates: Sequence[str],
        prefixes: Sequence[str],
        lexicons: Lexicons,
        seed: int = 0,
    ):
        if not templates or not prefixes:
            raise ValueError("fact responder needs templates and prefixes")
        self._base = base
        self._templates = tuple(templates)
        self._prefixes = tuple(prefixes)
        self._lexicons = lexicons
        self._rng = np.random.default_rng(seed)
        self._used: set[int] = set()

    def wake_up(self, article: Article) -> None:
        pass

    def conversation_vector(self, state: ConversationState) -> np.ndarray:
        tokens: list[str] = []
        for msg in state.history:
            tokens.extend(tokenize(msg.text))
        return self._base.store.avg(tokens)

    def respond(self, state: ConversationState) -> Optional[str]:
        idx = self._base.best_unused(self.conversation_vector(state), self._used)
        if idx is None:
            return None
        self._used.add(idx)
        template = self._templates[int(self._rng.integers(len(self._templates)))]
        sentence = template.replace("<fact>", self._base.facts[idx])
        last = last_human_text(state)
        if last is not None and "question" in classify_message_types(last, self._lexicons):
            prefix = self._prefixes[int(self._rng.integers(len(self._prefixes)))]
            sentence = prefix.replace("<fact sentence>", sentence)
        return sentence
