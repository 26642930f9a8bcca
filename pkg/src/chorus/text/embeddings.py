"""Word vector store.

Two ways to get one: load() parses the plain-text word2vec format (an optional
leading "count dim" header line is skipped); hashed() derives a deterministic
pseudo-random vector per token from a stable hash. The hashed store carries no
distributional semantics, only token identity, and exists so the engine runs
with zero external downloads.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from chorus.hashing import fnv1a


class EmbeddingStore:
    def __init__(self, dimension: int, vectors: dict[str, np.ndarray] | None = None):
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self._vectors: dict[str, np.ndarray] = {}
        for token, vec in (vectors or {}).items():
            self._set(token, vec)
        self._hashed_seed: int | None = None
        self._zero = np.zeros(dimension, dtype=np.float64)

    def _set(self, token: str, vec: np.ndarray) -> None:
        arr = np.asarray(vec, dtype=np.float64)
        if arr.shape != (self.dimension,):
            raise ValueError(
                f"vector for {token!r} has shape {arr.shape}, expected ({self.dimension},)"
            )
        self._vectors[token] = arr

    @classmethod
    def load(cls, path: str | Path, dimension: int | None = None) -> "EmbeddingStore":
        """Parse word2vec text format: one 'token v1 .. vd' line per word."""
        vectors: dict[str, list[float]] = {}
        dim = dimension
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh):
                parts = raw.rstrip("\n").split(" ")
                parts = [p for p in parts if p]
                if not parts:
                    continue
                if line_no == 0 and len(parts) == 2:
                    # header line: vocabulary size and dimensionality
                    declared = int(parts[1])
                    if dim is not None and declared != dim:
                        raise ValueError(
                            f"header declares dim {declared}, expected {dim}"
                        )
                    dim = declared
                    continue
                token, values = parts[0], parts[1:]
                if dim is None:
                    dim = len(values)
                if len(values) != dim:
                    raise ValueError(
                        f"line {line_no + 1}: {len(values)} values for {token!r}, expected {dim}"
                    )
                vectors[token] = [float(v) for v in values]
        if dim is None:
            raise ValueError(f"no vectors found in {path}")
        store = cls(dim)
        for token, vals in vectors.items():
            store._set(token, np.array(vals, dtype=np.float64))
        return store

    @classmethod
    def hashed(cls, dimension: int, seed: int = 0) -> "EmbeddingStore":
        store = cls(dimension)
        store._hashed_seed = seed
        return store

    def has(self, token: str) -> bool:
        if token in self._vectors:
            return True
        return self._hashed_seed is not None

    def vector(self, token: str) -> np.ndarray:
        """The token's vector; out-of-vocabulary tokens get the zero vector."""
        vec = self._vectors.get(token)
        if vec is not None:
            return vec
        if self._hashed_seed is not None:
            rng = np.random.default_rng((fnv1a(token) ^ self._hashed_seed) & 0xFFFFFFFFFFFFFFFF)
            vec = rng.standard_normal(self.dimension) / np.sqrt(self.dimension)
            self._vectors[token] = vec
            return vec
        return self._zero

    def known(self, tokens: list[str]) -> list[np.ndarray]:
        return [self.vector(t) for t in tokens if self.has(t)]

    def avg(self, tokens: list[str]) -> np.ndarray:
        """Mean of the in-vocabulary token vectors; zeros when none are known."""
        vecs = self.known(tokens)
        if not vecs:
            return self._zero.copy()
        return np.mean(vecs, axis=0)

    def __len__(self) -> int:
        return len(self._vectors)
