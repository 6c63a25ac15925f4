from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from assetgraph.vector import HashingEmbedder, HnswIndex, HttpEmbeddingProvider, VectorIndexError, EmbeddingError


def unit_vectors(n: int, dim: int, seed: int) -> np.ndarray:
    v = np.random.default_rng(seed).normal(size=(n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def oracle_knn(data: np.ndarray, q: np.ndarray, k: int) -> list:
    return list(np.argsort(-(data @ q), kind="stable")[:k])


@pytest.fixture(scope="module")
def built_index():
    data = unit_vectors(500, 384, seed=11)
    idx = HnswIndex(dim=384, M=16, ef_construction=200, seed=0)
    idx.add_many((f"v{i}", data[i]) for i in range(len(data)))
    return idx, data


class TestHnswRecall:
    def test_recall_at_ef64(self, built_index):
        idx, data = built_index
        queries = unit_vectors(100, 384, seed=12)
        recall = []
        for q in queries:
            exact = {f"v{i}" for i in oracle_knn(data, q, 10)}
            got = {k for k, _ in idx.knn(q, 10, ef=64)}
            recall.append(len(exact & got) / 10)
        assert np.mean(recall) >= 0.95

    def test_ef_equal_size_is_exact(self, built_index):
        idx, data = built_index
        for q in unit_vectors(100, 384, seed=13):
            assert [k for k, _ in idx.knn(q, 10, ef=len(idx))] == [f"v{i}" for i in oracle_knn(data, q, 10)]

    def test_self_match_distance_is_zero(self, built_index):
        idx, data = built_index
        key, d = idx.knn(data[7], 1)[0]
        assert key == "v7" and d == 0.0


class TestHnswContract:
    def test_empty_index(self):
        assert HnswIndex(dim=4).knn([1, 0, 0, 0], 3) == []

    @pytest.mark.parametrize("bad", [[1, 0, 0], [0, 0, 0, 0], [float("nan"), 0, 0, 1]])
    def test_bad_vectors(self, bad):
        with pytest.raises(VectorIndexError):
            HnswIndex(dim=4).insert("a", bad)

    def test_duplicate_key(self):
        idx = HnswIndex(dim=2)
        idx.insert("a", [1, 0])
        with pytest.raises(VectorIndexError):
            idx.insert("a", [0, 1])

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 60), st.integers(0, 10**6))
    def test_full_ef_matches_brute_force(self, n, seed):
        data = unit_vectors(n, 8, seed)
        idx = HnswIndex(dim=8, M=4, ef_construction=16, seed=seed)
        idx.add_many((f"k{i}", data[i]) for i in range(n))
        q = unit_vectors(1, 8, seed + 1)[0]
        k = min(5, n)
        assert [key for key, _ in idx.knn(q, k, ef=n)] == [key for key, _ in idx.exact_knn(q, k)]

    def test_from_graph_uses_embeddings(self, graph):
        idx = HnswIndex.from_graph(graph)
        assert len(idx) == graph.label_count("FailureMode")


class TestEmbedders:
    def test_hashing_embedder_is_deterministic_and_normalized(self):
        e = HashingEmbedder()
        a, b = e.embed("Bearing Wear"), e.embed("Bearing Wear")
        assert np.array_equal(a, b) and a.shape == (384,)
        assert np.linalg.norm(a) == pytest.approx(1.0)

    def test_similar_text_is_closer(self):
        e = HashingEmbedder()
        base = e.embed("bearing wear")
        assert base @ e.embed("bearing wearing") > base @ e.embed("refrigerant leak")

    def test_http_provider_requires_endpoint(self, monkeypatch):
        monkeypatch.delenv("EMBEDDING_ENDPOINT", raising=False)
        with pytest.raises(EmbeddingError):
            HttpEmbeddingProvider()
