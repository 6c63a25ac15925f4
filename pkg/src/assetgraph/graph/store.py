"""In-process typed property graph with label and property indices."""

from __future__ import annotations

import enum
import re
import threading
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

from .values import index_key, normalize_value

LLM_SOURCE = "LLM-derived"

_EDGE_TYPE_RE = re.compile(r"^[A-Z][A-Z0-9]*(?:_[A-Z0-9]+)*$")


class GraphError(Exception):
    """Raised on a rejected mutation (bad labels, dangling endpoints, ...)."""


class Provenance(enum.Enum):
    DATA = "data"
    LLM = "llm"


class Direction(enum.Enum):
    OUT = "out"
    IN = "in"
    BOTH = "both"


@dataclass(eq=False)
class Node:
    id: str
    labels: frozenset
    properties: Dict[str, Any]
    provenance: Provenance = Provenance.DATA

    @property
    def seq(self) -> int:
        return int(self.id[1:])

    def get(self, key: str, default: Any = None) -> Any:
        return self.properties.get(key, default)

    def __repr__(self) -> str:
        labels = ":".join(sorted(self.labels))
        return f"Node({self.id}:{labels} {self.properties.get('name', '')!r})"


@dataclass(eq=False)
class Edge:
    id: str
    type: str
    src: str
    dst: str
    properties: Dict[str, Any] = field(default_factory=dict)

    @property
    def seq(self) -> int:
        return int(self.id[1:])

    def other(self, node_id: str) -> str:
        return self.dst if node_id == self.src else self.src

    def __repr__(self) -> str:
        return f"Edge({self.id} {self.src}-[:{self.type}]->{self.dst})"


def _clean_props(properties: Optional[Mapping[str, Any]]) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for k, v in (properties or {}).items():
        if not isinstance(k, str) or not k:
            raise GraphError(f"property names must be nonempty strings, got {k!r}")
        if v is None:
            continue
        try:
            out[k] = normalize_value(v)
        except (TypeError, ValueError) as exc:
            raise GraphError(f"property {k!r}: {exc}") from None
    return out


class GraphStore:
    """Directed multigraph of labelled nodes and typed edges.

    Ids are engine-assigned and monotone (``n1, n2, ...`` for nodes and
    ``e1, e2, ...`` for edges). Readers may run concurrently; writers must
    hold :attr:`lock` (every mutating method takes it).
    """

    def __init__(self) -> None:
        self._nodes: Dict[str, Node] = {}
        self._edges: Dict[str, Edge] = {}
        self._out: Dict[str, Dict[str, None]] = {}
        self._in: Dict[str, Dict[str, None]] = {}
        self._by_label: Dict[str, Dict[str, None]] = {}
        self._by_type: Dict[str, Dict[str, None]] = {}
        self._prop_index: Dict[Tuple[str, str], Dict[Any, Dict[str, None]]] = {}
        self._next_node = 1
        self._next_edge = 1
        self.lock = threading.RLock()

    # -- mutation -----------------------------------------------------------

    def create_node(
        self,
        labels: Iterable[str],
        properties: Optional[Mapping[str, Any]] = None,
        provenance: Provenance = Provenance.DATA,
        *,
        node_id: Optional[str] = None,
    ) -> str:
        labels = frozenset(labels)
        if not labels:
            raise GraphError("a node needs at least one label")
        for label in labels:
            if not isinstance(label, str) or not label:
                raise GraphError(f"invalid label {label!r}")
        props = _clean_props(properties)
        if provenance is Provenance.LLM:
            props["source"] = LLM_SOURCE
        with self.lock:
            if node_id is None:
                node_id = f"n{self._next_node}"
            elif node_id in self._nodes or not re.fullmatch(r"n\d+", node_id):
                raise GraphError(f"node id {node_id!r} invalid or taken")
            self._next_node = max(self._next_node, int(node_id[1:]) + 1)
            node = Node(node_id, labels, props, provenance)
            self._nodes[node_id] = node
            self._out[node_id] = {}
            self._in[node_id] = {}
            for label in labels:
                self._by_label.setdefault(label, {})[node_id] = None
                for key, value in props.items():
                    self._index_add(label, key, value, node_id)
        return node_id

    def create_edge(
        self,
        type: str,
        src: str,
        dst: str,
        properties: Optional[Mapping[str, Any]] = None,
        *,
        edge_id: Optional[str] = None,
    ) -> str:
        if not isinstance(type, str) or not _EDGE_TYPE_RE.match(type):
            raise GraphError(f"edge type must be uppercase snake case, got {type!r}")
        props = _clean_props(properties)
        with self.lock:
            for end in (src, dst):
                if end not in self._nodes:
                    raise GraphError(f"dangling edge endpoint {end!r}")
            if edge_id is None:
                edge_id = f"e{self._next_edge}"
            elif edge_id in self._edges or not re.fullmatch(r"e\d+", edge_id):
                raise GraphError(f"edge id {edge_id!r} invalid or taken")
            self._next_edge = max(self._next_edge, int(edge_id[1:]) + 1)
            edge = Edge(edge_id, type, src, dst, props)
            self._edges[edge_id] = edge
            self._out[src][edge_id] = None
            self._in[dst][edge_id] = None
            self._by_type.setdefault(type, {})[edge_id] = None
        return edge_id

    def set_property(self, node_id: str, key: str, value: Any) -> None:
        with self.lock:
            node = self.node(node_id)
            if key == "source" and node.provenance is Provenance.LLM and value != LLM_SOURCE:
                raise GraphError("LLM-derived nodes must keep source='LLM-derived'")
            old = node.properties.get(key)
            for label in node.labels:
                if old is not None:
                    self._index_remove(label, key, old, node_id)
            if value is None:
                node.properties.pop(key, None)
                return
            new = _clean_props({key: value})[key]
            node.properties[key] = new
            for label in node.labels:
                self._index_add(label, key, new, node_id)

    def delete_edge(self, edge_id: str) -> None:
        with self.lock:
            edge = self._edges.pop(edge_id, None)
            if edge is None:
                raise GraphError(f"unknown edge {edge_id!r}")
            self._out[edge.src].pop(edge_id, None)
            self._in[edge.dst].pop(edge_id, None)
            bucket = self._by_type[edge.type]
            bucket.pop(edge_id, None)
            if not bucket:
                del self._by_type[edge.type]

    def delete_node(self, node_id: str) -> None:
        """Delete a node and every incident edge."""
        with self.lock:
            node = self.node(node_id)
            for eid in list(self._out[node_id]) + list(self._in[node_id]):
                if eid in self._edges:
                    self.delete_edge(eid)
            for label in node.labels:
                for key, value in node.properties.items():
                    self._index_remove(label, key, value, node_id)
                bucket = self._by_label[label]
                bucket.pop(node_id, None)
                if not bucket:
                    del self._by_label[label]
            del self._nodes[node_id], self._out[node_id], self._in[node_id]

    def _index_add(self, label: str, key: str, value: Any, node_id: str) -> None:
        k = index_key(value)
        if k is None:
            return
        self._prop_index.setdefault((label, key), {}).setdefault(k, {})[node_id] = None

    def _index_remove(self, label: str, key: str, value: Any, node_id: str) -> None:
        k = index_key(value)
        if k is None:
            return
        buckets = self._prop_index.get((label, key))
        if not buckets or k not in buckets:
            return
        buckets[k].pop(node_id, None)
        if not buckets[k]:
            del buckets[k]
        if not buckets:
            del self._prop_index[(label, key)]

    # -- reads --------------------------------------------------------------

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise GraphError(f"unknown node {node_id!r}") from None

    def edge(self, edge_id: str) -> Edge:
        try:
            return self._edges[edge_id]
        except KeyError:
            raise GraphError(f"unknown edge {edge_id!r}") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes

    def nodes(self) -> Iterator[Node]:
        return iter(list(self._nodes.values()))

    def edges(self) -> Iterator[Edge]:
        return iter(list(self._edges.values()))

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def labels(self) -> List[str]:
        return sorted(self._by_label)

    def edge_types(self) -> List[str]:
        return sorted(self._by_type)

    def label_count(self, label: str) -> int:
        return len(self._by_label.get(label, ()))

    def nodes_by_label(self, label: str) -> List[str]:
        return list(self._by_label.get(label, ()))

    def edges_by_type(self, type: str) -> List[str]:
        return list(self._by_type.get(type, ()))

    def nodes_by_property(self, label: str, key: str, value: Any) -> List[str]:
        k = index_key(value)
        if k is None:
            return []
        return list(self._prop_index.get((label, key), {}).get(k, ()))

    def has_property_index(self, label: str, key: str) -> bool:
        return (label, key) in self._prop_index

    def property_bucket_size(self, label: str, key: str, value: Any) -> int:
        k = index_key(value)
        return len(self._prop_index.get((label, key), {}).get(k, ())) if k else 0

    def out_edges(self, node_id: str) -> List[str]:
        return list(self._out.get(node_id, ()))

    def in_edges(self, node_id: str) -> List[str]:
        return list(self._in.get(node_id, ()))

    def neighbors(
        self,
        node_id: str,
        edge_types: Optional[Iterable[str]] = None,
        direction: Direction = Direction.OUT,
    ) -> List[Tuple[Edge, Node]]:
        """Incident edges paired with the node at the other end."""
        if node_id not in self._nodes:
            return []
        wanted = None if edge_types is None else set(edge_types)
        out: List[Tuple[Edge, Node]] = []
        if direction in (Direction.OUT, Direction.BOTH):
            for eid in self._out[node_id]:
                e = self._edges[eid]
                if wanted is None or e.type in wanted:
                    out.append((e, self._nodes[e.dst]))
        if direction in (Direction.IN, Direction.BOTH):
            for eid in self._in[node_id]:
                e = self._edges[eid]
                if direction is Direction.BOTH and e.src == e.dst:
                    continue  # self-loop already listed
                if wanted is None or e.type in wanted:
                    out.append((e, self._nodes[e.src]))
        return out

    def census(self) -> Tuple[Dict[str, int], Dict[str, int]]:
        """Per-label node counts and per-type edge counts."""
        return (
            {label: len(ids) for label, ids in sorted(self._by_label.items())},
            {t: len(ids) for t, ids in sorted(self._by_type.items())},
        )

    def llm_derived_nodes(self) -> List[str]:
        return [n.id for n in self._nodes.values() if n.provenance is Provenance.LLM]

    def __len__(self) -> int:
        return len(self._nodes)

    def __repr__(self) -> str:
        return f"GraphStore(nodes={len(self._nodes)}, edges={len(self._edges)})"
