"""Embedding providers and the HNSW nearest-neighbor index."""

from .embedding import (
    DEFAULT_DIM,
    EmbeddingError,
    EmbeddingProvider,
    HashingEmbedder,
    HttpEmbeddingProvider,
)
from .hnsw import HnswIndex, VectorIndexError

__all__ = [
    "DEFAULT_DIM",
    "EmbeddingError",
    "EmbeddingProvider",
    "HashingEmbedder",
    "HnswIndex",
    "HttpEmbeddingProvider",
    "VectorIndexError",
]
