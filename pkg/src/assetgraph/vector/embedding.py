"""Embedding providers.

``HashingEmbedder`` is a deterministic offline stand-in for a sentence
encoder: character n-grams are hashed into signed buckets and the result is
L2-normalized. ``HttpEmbeddingProvider`` talks to a remote encoder.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import urllib.error
import urllib.request
from typing import List, Optional, Protocol, Sequence, runtime_checkable

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_DIM = 384


class EmbeddingError(RuntimeError):
    pass


@runtime_checkable
class EmbeddingProvider(Protocol):
    model: str
    dim: int

    def embed(self, text: str) -> np.ndarray: ...

    def embed_many(self, texts: Sequence[str]) -> List[np.ndarray]: ...


class HashingEmbedder:
    """Seeded hashing of character n-grams into ``dim`` signed buckets."""

    def __init__(self, dim: int = DEFAULT_DIM, n: int = 3, seed: int = 0):
        if dim < 1 or n < 1:
            raise ValueError("dim and n must be positive")
        self.dim = dim
        self.n = n
        self.seed = seed
        self.model = f"hashing-{n}gram-{dim}d-s{seed}"
        self._salt = seed.to_bytes(8, "little", signed=True)

    def _grams(self, text: str) -> List[str]:
        padded = f" {' '.join(text.lower().split())} "
        if len(padded) <= self.n:
            return [padded]
        return [padded[i : i + self.n] for i in range(len(padded) - self.n + 1)]

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim)
        for gram in self._grams(text):
            digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8, salt=self._salt).digest()
            h = int.from_bytes(digest, "little")
            sign = 1.0 if h & 1 else -1.0
            vec[(h >> 1) % self.dim] += sign
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            # every gram cancelled out; fall back to a fixed bucket
            vec[0] = 1.0
            return vec
        return vec / norm

    def embed_many(self, texts: Sequence[str]) -> List[np.ndarray]:
        return [self.embed(t) for t in texts]


class HttpEmbeddingProvider:
    """POSTs ``{"texts": [...]}`` and expects ``{"vectors": [[...], ...]}``."""

    def __init__(
        self,
        endpoint: Optional[str] = None,
        model: str = "remote",
        dim: int = DEFAULT_DIM,
        timeout: float = 30.0,
    ):
        endpoint = endpoint or os.environ.get("EMBED_ENDPOINT")
        if not endpoint:
            raise EmbeddingError("no embedding endpoint configured (set EMBED_ENDPOINT)")
        self.endpoint = endpoint
        self.model = model
        self.dim = dim
        self.timeout = timeout

    def embed_many(self, texts: Sequence[str]) -> List[np.ndarray]:
        if not texts:
            return []
        body = json.dumps({"texts": list(texts)}).encode("utf-8")
        req = urllib.request.Request(
            self.endpoint, data=body, headers={"Content-Type": "application/json"}, method="POST"
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise EmbeddingError(f"embedding request failed: {exc}") from exc
        vectors = payload.get("vectors") if isinstance(payload, dict) else None
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise EmbeddingError("embedding response missing or mismatched 'vectors'")
        out = []
        for v in vectors:
            arr = np.asarray(v, dtype=np.float64)
            if arr.shape != (self.dim,):
                raise EmbeddingError(f"expected {self.dim}-dim vector, got shape {arr.shape}")
            norm = np.linalg.norm(arr)
            if norm == 0.0 or not np.isfinite(norm):
                raise EmbeddingError("embedding vector has zero or non-finite norm")
            out.append(arr / norm)
        return out

    def embed(self, text: str) -> np.ndarray:
        return self.embed_many([text])[0]
