"""PageRank by power iteration over a store subgraph."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .. import _kernels
from ..graph.store import GraphStore

logger = logging.getLogger(__name__)


class AnalyticsError(ValueError):
    pass


@dataclass
class CriticalityRanking:
    ranking: List[Tuple[str, float]]
    damping: float
    iterations: int
    residual: float
    edge_types: List[str] = field(default_factory=list)

    def score(self, node_id: str) -> float:
        return dict(self.ranking)[node_id]

    def top(self, n: int) -> List[Tuple[str, float]]:
        return self.ranking[:n]


def pagerank_arrays(
    n: int,
    src: Sequence[int],
    dst: Sequence[int],
    damping: float = 0.85,
    max_iter: int = 1000,
    tol: float = 1e-8,
) -> Tuple[np.ndarray, int, float]:
    """Scores for a graph given as parallel edge arrays over ``range(n)``.

    The damped operator contracts by ``damping`` in L1, so stopping once
    the step change drops below ``tol * (1 - damping) / damping`` bounds the
    L1 distance to the fixed point by ``tol``. Mass on nodes without
    out-edges is spread uniformly.
    """
    if not 0.0 < damping < 1.0:
        raise AnalyticsError("damping must lie in (0, 1)")
    if n == 0:
        return np.zeros(0), 0, 0.0
    s = np.ascontiguousarray(src, dtype=np.int64)
    d = np.ascontiguousarray(dst, dtype=np.int64)
    if s.shape != d.shape:
        raise AnalyticsError("src and dst must have equal length")
    if s.size and (s.min() < 0 or d.min() < 0 or s.max() >= n or d.max() >= n):
        raise AnalyticsError("edge endpoint out of range")
    step_tol = float(tol) * (1.0 - damping) / damping
    x, it, res = _kernels.pagerank_power(n, s, d, float(damping), int(max_iter), step_tol)
    return np.asarray(x), int(it), float(res)


def pagerank(
    graph: GraphStore,
    edge_types: Optional[Iterable[str]] = None,
    damping: float = 0.85,
    max_iter: int = 1000,
    tol: float = 1e-8,
    label: Optional[str] = None,
    undirected_types: Iterable[str] = (),
    reverse_types: Iterable[str] = (),
) -> CriticalityRanking:
    """Rank nodes (optionally only ``label`` nodes) by PageRank.

    ``undirected_types`` contribute an edge in both directions and
    ``reverse_types`` are followed against their stored direction.
    """
    undirected = set(undirected_types)
    reverse = set(reverse_types)
    types = set(edge_types) if edge_types is not None else None
    if types is not None:
        types |= undirected | reverse
    with graph.lock:
        if label is not None:
            ids = graph.nodes_by_label(label)
        else:
            ids = [n.id for n in graph.nodes()]
        pos: Dict[str, int] = {nid: i for i, nid in enumerate(ids)}
        src: List[int] = []
        dst: List[int] = []
        for e in graph.edges():
            if types is not None and e.type not in types:
                continue
            if e.src not in pos or e.dst not in pos:
                continue
            a, b = pos[e.src], pos[e.dst]
            if e.type in reverse:
                a, b = b, a
            src.append(a)
            dst.append(b)
            if e.type in undirected:
                src.append(b)
                dst.append(a)
    x, it, res = pagerank_arrays(len(ids), src, dst, damping, max_iter, tol)
    ranking = sorted(
        ((nid, float(x[i])) for nid, i in pos.items()),
        # rounding keeps symmetric nodes in creation order despite last-bit noise
        key=lambda t: (-round(t[1], 12), graph.node(t[0]).seq),
    )
    return CriticalityRanking(ranking, damping, it, res, sorted(types) if types is not None else [])


def criticality(graph: GraphStore, damping: float = 0.85, tol: float = 1e-8) -> CriticalityRanking:
    """Equipment criticality: heavily depended-upon equipment ranks high."""
    return pagerank(
        graph,
        edge_types=["DEPENDS_ON"],
        undirected_types=["SHARES_SYSTEM_WITH"],
        damping=damping,
        tol=tol,
        label="Equipment",
    )
