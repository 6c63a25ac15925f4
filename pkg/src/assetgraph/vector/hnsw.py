"""Hierarchical navigable small-world index with cosine distance.

Vectors are normalized on insert and distances are ``0.5 * ||u - v||^2``,
which equals ``1 - cos(u, v)`` for unit vectors and is exactly zero for a
self-match. Ties on distance break by key.

Layer 0 keeps a pinned spanning tree: each new element pins a two-way link
to one already-reachable neighbor, and pruning never drops pinned links.
That keeps every element reachable from the entry point, so a search with
``ef >= len(index)`` visits everything and is exact.
"""

from __future__ import annotations

import heapq
import logging
import math
import threading
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .. import _kernels

logger = logging.getLogger(__name__)


class VectorIndexError(ValueError):
    """Raised on dimension mismatch, bad vectors or duplicate keys."""


class HnswIndex:
    def __init__(
        self,
        dim: int = 384,
        M: int = 16,
        ef_construction: int = 200,
        ef_search: int = 64,
        seed: int = 0,
    ):
        if dim < 1 or M < 2:
            raise ValueError("dim must be >= 1 and M >= 2")
        self.dim = dim
        self.M = M
        self.M0 = 2 * M
        self.ef_construction = max(ef_construction, 1)
        self.ef_search = max(ef_search, 1)
        self.seed = seed
        self._ml = 1.0 / math.log(M)
        self._rng = np.random.default_rng(seed)
        self._data = np.zeros((16, dim))
        self._keys: List[str] = []
        self._index: Dict[str, int] = {}
        self._levels: List[int] = []
        # _links[layer][element] -> neighbor element ids
        self._links: List[Dict[int, List[int]]] = []
        self._pinned: Dict[int, Set[int]] = {}
        self._entry: Optional[int] = None
        self._write_lock = threading.Lock()

    # -- introspection ------------------------------------------------------

    def __len__(self) -> int:
        return len(self._keys)

    def __contains__(self, key: str) -> bool:
        return key in self._index

    @property
    def keys(self) -> List[str]:
        return list(self._keys)

    @property
    def top_layer(self) -> int:
        return len(self._links) - 1

    @property
    def entry_key(self) -> Optional[str]:
        return None if self._entry is None else self._keys[self._entry]

    def neighbors(self, key: str, layer: int = 0) -> List[str]:
        i = self._index[key]
        return [self._keys[j] for j in self._links[layer].get(i, [])]

    def layer_members(self, layer: int) -> List[str]:
        return [self._keys[i] for i in self._links[layer]]

    def vector(self, key: str) -> np.ndarray:
        return self._data[self._index[key]].copy()

    # -- distances ----------------------------------------------------------

    def _dist_many(self, query: np.ndarray, ids: Sequence[int]) -> np.ndarray:
        rows = np.asarray(ids, dtype=np.int64)
        return _kernels.half_sq_distances(self._data, rows, query)

    def _normalize(self, vector) -> np.ndarray:
        v = np.asarray(vector, dtype=np.float64).reshape(-1)
        if v.shape[0] != self.dim:
            raise VectorIndexError(f"vector has dimension {v.shape[0]}, index expects {self.dim}")
        norm = float(np.linalg.norm(v))
        if norm == 0.0 or not math.isfinite(norm):
            raise VectorIndexError("vector norm must be finite and nonzero")
        return np.ascontiguousarray(v / norm)

    # -- search primitives --------------------------------------------------

    def _greedy(self, query: np.ndarray, start: int, layer: int) -> int:
        cur = start
        cur_d = float(self._dist_many(query, [cur])[0])
        changed = True
        while changed:
            changed = False
            nbrs = self._links[layer].get(cur, [])
            if not nbrs:
                break
            ds = self._dist_many(query, nbrs)
            for j, d in zip(nbrs, ds):
                if (d, self._keys[j]) < (cur_d, self._keys[cur]):
                    cur, cur_d, changed = j, float(d), True
        return cur

    def _search_layer(self, query: np.ndarray, start: int, ef: int, layer: int) -> List[Tuple[float, str, int]]:
        """Beam search; returns up to ``ef`` (distance, key, id) ascending."""
        keys = self._keys
        d0 = float(self._dist_many(query, [start])[0])
        visited = {start}
        candidates = [(d0, keys[start], start)]
        best: List[Tuple[float, str, int]] = [(d0, keys[start], start)]
        links = self._links[layer]
        while candidates:
            c = heapq.heappop(candidates)
            if len(best) >= ef and c[:2] > best[-1][:2]:
                break
            fresh = [j for j in links.get(c[2], []) if j not in visited]
            if not fresh:
                continue
            visited.update(fresh)
            for j, d in zip(fresh, self._dist_many(query, fresh)):
                item = (float(d), keys[j], j)
                if len(best) < ef or item[:2] < best[-1][:2]:
                    heapq.heappush(candidates, item)
                    _insort(best, item)
                    if len(best) > ef:
                        best.pop()
        return best

    def _select(self, owner: int, cand: List[int], limit: int, layer: int) -> List[int]:
        pinned = self._pinned[owner] if layer == 0 else set()
        keep = [j for j in cand if j in pinned]
        rest = [j for j in cand if j not in pinned]
        if len(keep) + len(rest) <= limit:
            return keep + rest
        ds = self._dist_many(self._data[owner], rest)
        order = sorted(range(len(rest)), key=lambda i: (ds[i], self._keys[rest[i]]))
        return keep + [rest[i] for i in order[: max(limit - len(keep), 0)]]

    # -- mutation -----------------------------------------------------------

    def insert(self, key: str, vector) -> None:
        vec = self._normalize(vector)
        with self._write_lock:
            if key in self._index:
                raise VectorIndexError(f"duplicate key {key!r}")
            i = len(self._keys)
            if i == self._data.shape[0]:
                grown = np.zeros((2 * i, self.dim))
                grown[:i] = self._data
                self._data = grown
            self._data[i] = vec
            self._keys.append(key)
            self._index[key] = i
            level = int(-math.log(1.0 - self._rng.random()) * self._ml)
            self._levels.append(level)
            while len(self._links) <= level:
                self._links.append({})
            for layer in range(level + 1):
                self._links[layer][i] = []
            self._pinned[i] = set()
            if self._entry is None:
                self._entry = i
                return
            ep = self._entry
            top = self._levels[ep]
            for layer in range(top, level, -1):
                ep = self._greedy(vec, ep, layer)
            pin_target: Optional[int] = None
            for layer in range(min(level, top), -1, -1):
                found = self._search_layer(vec, ep, self.ef_construction, layer)
                limit = self.M0 if layer == 0 else self.M
                chosen = [j for _, _, j in found][:limit]
                if layer == 0:
                    pin_target = self._pick_parent([j for _, _, j in found])
                    if pin_target is not None and pin_target not in chosen:
                        chosen = chosen[: limit - 1] if len(chosen) >= limit else chosen
                        chosen.append(pin_target)
                    if pin_target is not None:
                        self._pinned[i].add(pin_target)
                        self._pinned[pin_target].add(i)
                self._links[layer][i] = list(chosen)
                for j in chosen:
                    nl = self._links[layer][j]
                    nl.append(i)
                    if len(nl) > limit:
                        self._links[layer][j] = self._select(j, nl, limit, layer)
                ep = found[0][2]
            if level > top:
                self._entry = i

    def _pick_parent(self, ordered: List[int]) -> Optional[int]:
        # cap pinned links so pruning always has room for a fresh neighbor
        cap = self.M0 // 2
        for j in ordered:
            if len(self._pinned[j]) < cap:
                return j
        for j in range(len(self._keys) - 1):
            if len(self._pinned[j]) < cap:
                return j
        return None

    def add_many(self, items: Iterable[Tuple[str, Sequence[float]]]) -> None:
        for key, vec in items:
            self.insert(key, vec)

    # -- query --------------------------------------------------------------

    def knn(self, query, k: int, ef: Optional[int] = None) -> List[Tuple[str, float]]:
        """Up to ``k`` (key, cosine distance) pairs, ascending."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if self._entry is None:
            return []
        q = self._normalize(query)
        ef = max(ef if ef is not None else self.ef_search, k)
        ep = self._entry
        for layer in range(self._levels[ep], 0, -1):
            ep = self._greedy(q, ep, layer)
        found = self._search_layer(q, ep, ef, 0)
        return [(key, max(d, 0.0)) for d, key, _ in found[:k]]

    def exact_knn(self, query, k: int) -> List[Tuple[str, float]]:
        """Brute-force scan with identical distance arithmetic."""
        if len(self) == 0:
            return []
        q = self._normalize(query)
        ds = self._dist_many(q, range(len(self)))
        order = sorted(range(len(self)), key=lambda i: (ds[i], self._keys[i]))
        return [(self._keys[i], max(float(ds[i]), 0.0)) for i in order[:k]]

    # -- construction from a graph -----------------------------------------

    @classmethod
    def from_graph(cls, graph, label: str = "FailureMode", prop: str = "embedding", **params) -> "HnswIndex":
        """Rebuild from node vector properties in node-creation order."""
        first = None
        items = []
        for nid in graph.nodes_by_label(label):
            vec = graph.node(nid).properties.get(prop)
            if isinstance(vec, list) and vec:
                first = first or len(vec)
                items.append((nid, vec))
        index = cls(dim=params.pop("dim", first or 384), **params)
        index.add_many(items)
        return index


def _insort(items: List[Tuple[float, str, int]], item: Tuple[float, str, int]) -> None:
    lo, hi = 0, len(items)
    key = item[:2]
    while lo < hi:
        mid = (lo + hi) // 2
        if items[mid][:2] < key:
            lo = mid + 1
        else:
            hi = mid
    items.insert(lo, item)
