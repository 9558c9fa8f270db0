"""Deterministic toy sentence embedder: hashed character n-grams projected to a fixed dim.

Stands in for a real paraphrastic sentence encoder in self-contained runs:
texts with shared character n-grams land near each other on the unit
sphere. Hashing uses crc32, so embeddings are stable across processes
regardless of PYTHONHASHSEED.
"""
from __future__ import annotations

import zlib

import numpy as np

from .errors import InputError

DEFAULT_DIM = 64


class HashedNgramEmbedder:
    """Bag of hashed character n-grams, randomly projected and unit-normalized."""

    def __init__(
        self,
        dim: int = DEFAULT_DIM,
        ngram_sizes: tuple[int, ...] = (2, 3, 4),
        num_buckets: int = 4096,
        seed: int = 0,
    ) -> None:
        if dim < 1 or num_buckets < 1:
            raise InputError("dim and num_buckets must be positive")
        self.dim = dim
        self.ngram_sizes = ngram_sizes
        self.num_buckets = num_buckets
        rng = np.random.default_rng(seed)
        # Fixed projection; rows ~ N(0, 1/dim) so bucket counts mix evenly.
        self._projection = rng.standard_normal((num_buckets, dim)) / np.sqrt(dim)

    def _bucket_counts(self, text: str) -> np.ndarray:
        if not text:
            raise InputError("cannot embed empty text")
        # Boundary padding guarantees at least one n-gram for short texts.
        padded = f"#{text.lower()}#"
        counts = np.zeros(self.num_buckets, dtype=np.float64)
        for size in self.ngram_sizes:
            for start in range(max(len(padded) - size + 1, 0)):
                gram = padded[start : start + size]
                counts[zlib.crc32(gram.encode("utf-8")) % self.num_buckets] += 1.0
        return counts

    def embed(self, text: str) -> np.ndarray:
        """Map one text to a unit vector of length ``dim``."""
        vec = self._bucket_counts(text) @ self._projection
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise InputError(f"text hashed to a zero vector: {text!r}")
        return vec / norm

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        """Stack ``embed`` over texts into an (N, dim) matrix."""
        if not texts:
            return np.zeros((0, self.dim), dtype=np.float64)
        return np.stack([self.embed(t) for t in texts])
