"""Article topic classification and the topic responder.

A linear bag-of-n-grams classifier: hashed unigram/bigram counts, an input
matrix A mapping buckets to a small hidden vector, an output matrix B mapping
that to the 10 fixed topic labels, softmax on top. Trained by SGD on the
negative log-likelihood with sparse row updates, so startup training on the
shipped seed corpus takes milliseconds.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from chorus.core import Article, ConversationState
from chorus.hashing import fnv1a
from chorus.responders.base import Responder
from chorus.scoring.losses import softmax
from chorus.text.tokenize import tokenize

TOPIC_LABELS = (
    "Society & Culture",
    "Science & Mathematics",
    "Health",
    "Education & Reference",
    "Computers & Internet",
    "Sports",
    "Business & Finance",
    "Entertainment & Music",
    "Family & Relationships",
    "Politics & Government",
)

DEFAULT_BUCKETS = 2**18


def hashed_ngram_counts(text: str, buckets: int) -> dict[int, float]:
    """Unigram and bigram counts hashed into buckets, L1-normalized."""
    tokens = tokenize(text)
    if not tokens:
        raise ValueError("cannot featurize empty text")
    counts: dict[int, float] = {}
    grams = list(tokens)
    grams.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    for gram in grams:
        counts[fnv1a(gram) % buckets] = counts.get(fnv1a(gram) % buckets, 0.0) + 1.0
    total = sum(counts.values())
    return {b: c / total for b, c in counts.items()}


class TopicModel:
    def __init__(self, buckets: int = DEFAULT_BUCKETS, hidden: int = 10, seed: int = 0):
        if buckets & (buckets - 1):
            raise ValueError("bucket count must be a power of two")
        rng = np.random.default_rng(seed)
        self.buckets = buckets
        self.A = rng.uniform(-1.0 / hidden, 1.0 / hidden, size=(buckets, hidden))
        self.B = np.zeros((hidden, len(TOPIC_LABELS)))

    def _hidden(self, counts: dict[int, float]) -> np.ndarray:
        h = np.zeros(self.A.shape[1])
        for b, c in counts.items():
            h += c * self.A[b]
        return h

    def probabilities(self, text: str) -> np.ndarray:
        counts = hashed_ngram_counts(text, self.buckets)
        logits = self._hidden(counts) @ self.B
        return softmax(logits[None, :])[0]

    def predict(self, text: str) -> tuple[str, float]:
        """Argmax label and its probability; no sampling at inference."""
        probs = self.probabilities(text)
        top = int(np.argmax(probs))
        return TOPIC_LABELS[top], float(probs[top])

    def train(
        self,
        texts: Sequence[str],
        labels: Sequence[str],
        epochs: int = 60,
        learning_rate: float = 0.5,
        seed: int = 0,
    ) -> float:
        """SGD on the NLL; returns final training accuracy."""
        if len(texts) != len(labels):
            raise ValueError("texts and labels must align")
        label_idx = [TOPIC_LABELS.index(lab) for lab in labels]
        featurized = [hashed_ngram_counts(t, self.buckets) for t in texts]
        rng = np.random.default_rng(seed)
        for _ in range(epochs):
            for i in rng.permutation(len(texts)):
                counts = featurized[i]
                h = self._hidden(counts)
                p = softmax((h @ self.B)[None, :])[0]
                dlogits = p.copy()
                dlogits[label_idx[i]] -= 1.0
                dh = self.B @ dlogits
                self.B -= learning_rate * np.outer(h, dlogits)
                for b, c in counts.items():
                    self.A[b] -= learning_rate * c * dh
        correct = sum(
            1
            for i, counts in enumerate(featurized)
            if int(np.argmax(self._hidden(counts) @ self.B)) == label_idx[i]
        )
        return correct / len(texts)

    def save(self, path: str | Path) -> None:
        np.savez(path, A=self.A, B=self.B, buckets=np.array(self.buckets))

    @classmethod
    def load(cls, path: str | Path) -> "TopicModel":
        with np.load(path) as data:
            model = cls.__new__(cls)
            model.buckets = int(data["buckets"])
            model.A = data["A"].copy()
            model.B = data["B"].copy()
        return model


def load_seed_corpus(path: str | Path) -> tuple[list[str], list[str]]:
    texts: list[str] = []
    labels: list[str] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        label, text = line.split("\t", 1)
        if label not in TOPIC_LABELS:
            raise ValueError(f"unknown topic label {label!r}")
        labels.append(label)
        texts.append(text)
    return texts, labels


class TopicResponder(Responder):
    """Classifies the article once at wake-up, answers from stored topic."""

    name = "topic"

    def __init__(self, model: TopicModel, templates: Sequence[str], seed: int = 0):
        if not templates:
            raise ValueError("topic responder needs at least one template")
        self._model = model
        self._templates = tuple(templates)
        self._rng = np.random.default_rng(seed)
        self._topic: Optional[str] = None
        self.confidence: Optional[float] = None

    def wake_up(self, article: Article) -> None:
        self._topic, self.confidence = self._model.predict(article.text)

    def respond(self, state: ConversationState) -> Optional[str]:
        # classifier result missing (e.g. wake-up never finished) -> no reply
        if self._topic is None:
            return None
        template = self._templates[int(self._rng.integers(len(self._templates)))]
        return template.replace("<topic>", self._topic)
