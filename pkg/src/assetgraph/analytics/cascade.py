"""Dependency cascade traversal and MTBF statistics."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from ..graph.store import Direction, GraphStore, Node
from .pagerank import AnalyticsError


@dataclass
class CascadeReport:
    root: str
    affected: List[Tuple[str, int]]
    edge_types: List[str] = field(default_factory=list)

    @property
    def ids(self) -> List[str]:
        return [nid for nid, _ in self.affected]


def cascade(
    graph: GraphStore,
    root: str,
    edge_types: Iterable[str] = ("DEPENDS_ON",),
    max_depth: Optional[int] = None,
) -> CascadeReport:
    """Everything whose operation depends, directly or transitively, on ``root``.

    ``X -[:DEPENDS_ON]-> Y`` means a failure of Y reaches X, so the BFS
    walks those edges backwards. Results are ordered by (hop, node seq).
    """
    types = list(edge_types)
    if not graph.has_node(root):
        raise AnalyticsError(f"unknown node {root!r}")
    hops = {root: 0}
    frontier = deque([root])
    with graph.lock:
        while frontier:
            cur = frontier.popleft()
            h = hops[cur]
            if max_depth is not None and h >= max_depth:
                continue
            for _, other in graph.neighbors(cur, types, Direction.IN):
                if other.id not in hops:
                    hops[other.id] = h + 1
                    frontier.append(other.id)
        affected = sorted(
            ((nid, h) for nid, h in hops.items() if nid != root),
            key=lambda t: (t[1], graph.node(t[0]).seq),
        )
    return CascadeReport(root, affected, types)


def upstream(
    graph: GraphStore,
    root: str,
    edge_types: Iterable[str] = ("DEPENDS_ON",),
    max_depth: Optional[int] = None,
) -> CascadeReport:
    """Everything ``root`` depends on: the same BFS following edges forwards."""
    types = list(edge_types)
    if not graph.has_node(root):
        raise AnalyticsError(f"unknown node {root!r}")
    hops = {root: 0}
    frontier = deque([root])
    with graph.lock:
        while frontier:
            cur = frontier.popleft()
            h = hops[cur]
            if max_depth is not None and h >= max_depth:
                continue
            for _, other in graph.neighbors(cur, types, Direction.OUT):
                if other.id not in hops:
                    hops[other.id] = h + 1
                    frontier.append(other.id)
        affected = sorted(
            ((nid, h) for nid, h in hops.items() if nid != root),
            key=lambda t: (t[1], graph.node(t[0]).seq),
        )
    return CascadeReport(root, affected, types)


# -- MTBF -------------------------------------------------------------------


@dataclass
class MtbfStat:
    equipment_id: str
    count: int
    mean_gap_hours: Optional[float]
    window: Tuple[Optional[datetime], Optional[datetime]]
    failure_ids: List[str] = field(default_factory=list)


def mean_gap_hours(times: Sequence[datetime]) -> Tuple[int, Optional[float]]:
    """(count, mean consecutive gap in calendar hours); mean is None below 2."""
    ordered = sorted(times)
    if len(ordered) < 2:
        return len(ordered), None
    gaps = [(b - a).total_seconds() / 3600.0 for a, b in zip(ordered, ordered[1:])]
    return len(ordered), math.fsum(gaps) / (len(ordered) - 1)


def is_failure_event(node: Node) -> bool:
    """Default failure filter: corrective work orders."""
    return node.get("kind") == "work_order" and node.get("wo_type") == "corrective"


def mtbf(
    graph: GraphStore,
    equipment_id: str,
    event_filter: Optional[Callable[[Node], bool]] = None,
    window: Optional[Tuple[Optional[datetime], Optional[datetime]]] = None,
) -> MtbfStat:
    """MTBF over the Event nodes attached to an equipment node via FOR_EQUIPMENT."""
    if not graph.has_node(equipment_id):
        raise AnalyticsError(f"unknown node {equipment_id!r}")
    keep = event_filter or is_failure_event
    start, end = window if window is not None else (None, None)
    stamped: List[Tuple[datetime, int, str]] = []
    with graph.lock:
        for _, ev in graph.neighbors(equipment_id, ["FOR_EQUIPMENT"], Direction.IN):
            ts = ev.get("timestamp")
            if not isinstance(ts, datetime) or not keep(ev):
                continue
            if start is not None and ts < start:
                continue
            if end is not None and ts > end:
                continue
            stamped.append((ts, ev.seq, ev.id))
    stamped.sort()
    count, mean = mean_gap_hours([t for t, _, _ in stamped])
    if window is None:
        window = (stamped[0][0], stamped[-1][0]) if stamped else (None, None)
    return MtbfStat(equipment_id, count, mean, window, [i for _, _, i in stamped])
