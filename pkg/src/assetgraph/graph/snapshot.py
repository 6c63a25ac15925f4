"""Line-delimited JSON snapshot of a graph.

One record per line, keys sorted, LF endings::

    {"n":{"id":"n1","labels":["Equipment"],"props":{...},"prov":"data"}}
    {"e":{"dst":"n2","id":"e1","props":{},"src":"n1","type":"HAS_SENSOR"}}
    {"g":{...}}                       # enrichment cache records
    {"end":{"edges":1,"nodes":2,"records":0}}

Nodes precede edges, edges precede cache records. Timestamps are written
as ``{"$ts": "2019-01-01T00:00:00Z"}``. The trailing ``end`` record lets a
truncated file be told apart from a complete one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Union

from .store import GraphError, GraphStore, Provenance
from .values import format_timestamp, parse_timestamp

PathLike = Union[str, Path]


class SnapshotError(Exception):
    def __init__(self, path: str, line: int, offset: int, message: str):
        self.path = path
        self.line = line
        self.offset = offset
        super().__init__(f"{path}:{line}:{offset}: {message}")


@dataclass
class Snapshot:
    graph: GraphStore
    records: List[Dict[str, Any]] = field(default_factory=list)


def _encode(value: Any) -> Any:
    if isinstance(value, datetime):
        return {"$ts": format_timestamp(value)}
    return value


def _decode(value: Any) -> Any:
    if isinstance(value, dict):
        if set(value) != {"$ts"}:
            raise ValueError("unexpected object property value")
        return parse_timestamp(value["$ts"])
    return value


def _dump(record: Dict[str, Any]) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def dumps(graph: GraphStore, records: List[Dict[str, Any]] = ()) -> str:
    lines = []
    for node in sorted(graph.nodes(), key=lambda n: n.seq):
        lines.append(
            _dump(
                {
                    "n": {
                        "id": node.id,
                        "labels": sorted(node.labels),
                        "props": {k: _encode(v) for k, v in node.properties.items()},
                        "prov": node.provenance.value,
                    }
                }
            )
        )
    for edge in sorted(graph.edges(), key=lambda e: e.seq):
        lines.append(
            _dump(
                {
                    "e": {
                        "id": edge.id,
                        "type": edge.type,
                        "src": edge.src,
                        "dst": edge.dst,
                        "props": {k: _encode(v) for k, v in edge.properties.items()},
                    }
                }
            )
        )
    for rec in records:
        lines.append(_dump({"g": rec}))
    lines.append(
        _dump({"end": {"nodes": graph.node_count, "edges": graph.edge_count, "records": len(records)}})
    )
    return "\n".join(lines) + "\n"


def save(graph: GraphStore, path: PathLike, records: List[Dict[str, Any]] = ()) -> None:
    Path(path).write_bytes(dumps(graph, list(records)).encode("utf-8"))


def loads(text: str, path: str = "<string>") -> Snapshot:
    graph = GraphStore()
    records: List[Dict[str, Any]] = []
    phase = 0  # 0 nodes, 1 edges, 2 records, 3 ended
    lineno = 0
    for lineno, line in enumerate(text.split("\n"), start=1):
        if line == "":
            continue
        if phase == 3:
            raise SnapshotError(path, lineno, 1, "data after end record")
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SnapshotError(path, lineno, exc.colno, exc.msg) from None
        if not isinstance(rec, dict) or len(rec) != 1:
            raise SnapshotError(path, lineno, 1, "record must be an object with one key")
        (kind, body), = rec.items()
        try:
            if kind == "n":
                if phase > 0:
                    raise ValueError("node record after edge or cache records")
                graph.create_node(
                    body["labels"],
                    {k: _decode(v) for k, v in body["props"].items()},
                    Provenance(body["prov"]),
                    node_id=body["id"],
                )
            elif kind == "e":
                if phase > 1:
                    raise ValueError("edge record after cache records")
                phase = 1
                graph.create_edge(
                    body["type"],
                    body["src"],
                    body["dst"],
                    {k: _decode(v) for k, v in body["props"].items()},
                    edge_id=body["id"],
                )
            elif kind == "g":
                phase = 2
                if not isinstance(body, dict):
                    raise ValueError("cache record must be an object")
                records.append(body)
            elif kind == "end":
                expected = {"nodes": graph.node_count, "edges": graph.edge_count, "records": len(records)}
                if body != expected:
                    raise ValueError(f"end record {body} does not match contents {expected}")
                phase = 3
            else:
                raise ValueError(f"unknown record kind {kind!r}")
        except (KeyError, TypeError, ValueError, AttributeError, GraphError) as exc:
            detail = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
            raise SnapshotError(path, lineno, 1, detail) from None
    if phase != 3:
        raise SnapshotError(path, lineno, 1, "unexpected end of file (no end record)")
    return Snapshot(graph, records)


def load(path: PathLike) -> Snapshot:
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise SnapshotError(str(p), 0, 0, str(exc)) from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SnapshotError(str(p), raw[: exc.start].count(b"\n") + 1, 1, "invalid UTF-8") from None
    return loads(text, str(p))
