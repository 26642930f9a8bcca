"""Runtime scorers: the bridge between trained nets and the selection layer."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Protocol, Sequence

import numpy as np

from chorus.core import Candidate, ConversationState
from chorus.features import FeatureExtractor
from chorus.scoring.checkpoint import Checkpoint, load_checkpoint
from chorus.scoring.deep_net import DeepEmbedder
from chorus.scoring.losses import softmax
from chorus.text.embeddings import EmbeddingStore
from chorus.text.entities import EntityTagger
from chorus.text.lexicons import Lexicons


class ManifestMismatch(ValueError):
    """The checkpoint was trained against a different feature layout."""


class Scorer(Protocol):
    def score(self, state: ConversationState, candidate_text: str) -> float: ...


class ConstantScorer:
    def __init__(self, value: float = 0.5):
        self.value = value

    def score(self, state: ConversationState, candidate_text: str) -> float:
        return self.value


class SeededRandomScorer:
    """Uniform scores from a seeded stream; useful as an evaluation baseline."""

    def __init__(self, seed: int = 0):
        self._rng = np.random.default_rng(seed)

    def score(self, state: ConversationState, candidate_text: str) -> float:
        return float(self._rng.random())


class ModelScorer:
    """Scores candidates with a trained net.

    Reward nets give P(upvote) in [0, 1] (softmax over the two logits, dropout
    off); Q nets give the raw scalar. extract() path depends on the net kind:
    feature vectors for the small net, embedded sequences for the deep one.
    """

    def __init__(
        self,
        net,
        params: dict[str, np.ndarray],
        objective: str,
        extractor: Optional[FeatureExtractor] = None,
        embedder: Optional[DeepEmbedder] = None,
    ):
        if (extractor is None) == (embedder is None):
            raise ValueError("provide exactly one of extractor or embedder")
        self.net = net
        self.params = params
        self.objective = objective
        self.extractor = extractor
        self.embedder = embedder

    def _inputs(self, state: ConversationState, texts: Sequence[str]):
        if self.extractor is not None:
            return np.stack([self.extractor.extract(state, t).values for t in texts])
        assert self.embedder is not None
        return [self.embedder.sample(state, t) for t in texts]

    def score_candidates(self, state: ConversationState, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros(0)
        out, _ = self.net.forward_batch(self.params, self._inputs(state, texts), train=False)
        if self.objective == "reward":
            return softmax(out)[:, 1]
        return out[:, 0]

    def score(self, state: ConversationState, candidate_text: str) -> float:
        return float(self.score_candidates(state, [candidate_text])[0])

    def q_fn(self, params: Optional[dict[str, np.ndarray]] = None):
        """Closure over specific parameters, shaped for double_dqn_target."""
        use = self.params if params is None else params

        def q(state: ConversationState, candidate: Candidate) -> float:
            out, _ = self.net.forward_batch(use, self._inputs(state, [candidate.text]), train=False)
            if self.objective == "reward":
                return float(softmax(out)[0, 1])
            return float(out[0, 0])

        return q

    @classmethod
    def from_checkpoint(
        cls,
        path: str | Path | Checkpoint,
        store: EmbeddingStore,
        lexicons: Lexicons,
        tagger: EntityTagger,
    ) -> "ModelScorer":
        ckpt = path if isinstance(path, Checkpoint) else load_checkpoint(path)
        net = ckpt.build_net()
        kind = ckpt.net_config["kind"]
        if kind == "small":
            extractor = FeatureExtractor(store, lexicons, tagger)
            if extractor.manifest_dict() != ckpt.manifest:
                raise ManifestMismatch(
                    "feature manifest in the checkpoint does not match this extractor"
                )
            return cls(net, ckpt.params, ckpt.objective, extractor=extractor)
        if kind == "deep":
            declared = ckpt.manifest.get("embedding_dim")
            if declared != store.dimension:
                raise ManifestMismatch(
                    f"checkpoint expects {declared}-dim embeddings, store has {store.dimension}"
                )
            embedder = DeepEmbedder(
                store,
                max_messages=ckpt.net_config.get("max_messages", 11),
                max_tokens=ckpt.net_config.get("max_tokens", 40),
            )
            return cls(net, ckpt.params, ckpt.objective, embedder=embedder)
        raise ValueError(f"unknown net kind {kind!r}")
