"""Schema descriptor derived from live graph contents."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

from .store import GraphStore
from .values import index_key, render_value, sort_key


@dataclass
class PropertyInfo:
    name: str
    examples: List[Any] = field(default_factory=list)
    vector: bool = False


@dataclass
class LabelInfo:
    label: str
    count: int
    properties: List[PropertyInfo]


@dataclass
class EdgeTypeInfo:
    type: str
    count: int
    endpoints: List[Tuple[str, str]]
    properties: List[str]


@dataclass
class SchemaDescriptor:
    labels: List[LabelInfo] = field(default_factory=list)
    edge_types: List[EdgeTypeInfo] = field(default_factory=list)

    def is_empty(self) -> bool:
        return not self.labels and not self.edge_types

    def label(self, name: str) -> LabelInfo | None:
        return next((info for info in self.labels if info.label == name), None)

    def render(self) -> str:
        """Compact text listing used inside LLM prompts."""
        lines = ["Node labels (property: example values):"]
        for info in self.labels:
            lines.append(f"(:{info.label})  -- {info.count} nodes")
            for p in info.properties:
                if p.vector:
                    lines.append(f"    {p.name}: <vector>")
                else:
                    samples = ", ".join(_literal(v) for v in p.examples)
                    lines.append(f"    {p.name}: {samples}")
        lines.append("Relationship types (source)-[:TYPE]->(target):")
        for info in self.edge_types:
            for src, dst in info.endpoints:
                lines.append(f"(:{src})-[:{info.type}]->(:{dst})")
        return "\n".join(lines)


def _literal(value: Any) -> str:
    if isinstance(value, str):
        return "'" + value.replace("\\", "\\\\").replace("'", "\\'") + "'"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    return "'" + render_value(value) + "'"


def derive_schema(graph: GraphStore, samples: int = 5) -> SchemaDescriptor:
    """Describe every label and edge type present in ``graph``.

    Sampled values are the lexicographically first distinct stored values
    of each property (ordered by type, then value).
    """
    per_label: Dict[str, Dict[str, Dict[Any, Any]]] = {}
    vectors: Dict[str, set] = {}
    for node in graph.nodes():
        for label in node.labels:
            props = per_label.setdefault(label, {})
            for key, value in node.properties.items():
                seen = props.setdefault(key, {})
                k = index_key(value)
                if k is None:
                    vectors.setdefault(label, set()).add(key)
                elif k not in seen:
                    seen[k] = value
    labels = []
    for label in sorted(per_label):
        infos = []
        for key in sorted(per_label[label]):
            distinct = sorted(per_label[label][key].values(), key=sort_key)
            infos.append(
                PropertyInfo(key, distinct[:samples], key in vectors.get(label, ()))
            )
        labels.append(LabelInfo(label, graph.label_count(label), infos))

    per_type: Dict[str, Tuple[set, set]] = {}
    for edge in graph.edges():
        ends, props = per_type.setdefault(edge.type, (set(), set()))
        for s in graph.node(edge.src).labels:
            for d in graph.node(edge.dst).labels:
                ends.add((s, d))
        props.update(edge.properties)
    edge_types = [
        EdgeTypeInfo(t, len(graph.edges_by_type(t)), sorted(ends), sorted(props))
        for t, (ends, props) in sorted(per_type.items())
    ]
    return SchemaDescriptor(labels, edge_types)
