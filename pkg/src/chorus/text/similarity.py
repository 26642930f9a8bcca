"""Embedding-space similarity between token sequences."""

from __future__ import annotations

import numpy as np

from chorus.text.embeddings import EmbeddingStore


def cosine_sim(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def _pool_extrema(vecs: list[np.ndarray]) -> np.ndarray:
    """Per dimension, keep the value of largest magnitude (sign preserved).

    Equal-magnitude ties resolve to the positive sign so the pooling stays
    invariant to token order.
    """
    stack = np.stack(vecs)
    magnitudes = np.abs(stack)
    top = magnitudes.max(axis=0)
    tied = np.where(magnitudes == top, stack, -np.inf)
    return tied.max(axis=0)


def extrema_sim(tokens_a: list[str], tokens_b: list[str], store: EmbeddingStore) -> float:
    va = store.known(tokens_a)
    vb = store.known(tokens_b)
    if not va or not vb:
        return 0.0
    return cosine_sim(_pool_extrema(va), _pool_extrema(vb))


def greedy_match_sim(tokens_a: list[str], tokens_b: list[str], store: EmbeddingStore) -> float:
    """Symmetrized mean of per-token best cosine matches across the two sides."""
    va = store.known(tokens_a)
    vb = store.known(tokens_b)
    if not va or not vb:
        return 0.0
    sims = np.array([[cosine_sim(x, y) for y in vb] for x in va])
    forward = float(np.mean(np.max(sims, axis=1)))
    backward = float(np.mean(np.max(sims, axis=0)))
    return 0.5 * (forward + backward)
