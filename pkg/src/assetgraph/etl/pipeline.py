"""Eight-step build of the asset graph from a :class:`SourceBundle`.

Steps: (1) parse hierarchy, (2) create Site/Location/Equipment,
(3) parse and create sensors, (4) parse failure modes, (5) embed and index
failure modes, (6) link MONITORS by sensor type, (7) load events,
(8) apply topology. Optional monitoring rules and sensor readings are
loaded after step 8 when the bundle names them.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

from ..graph.store import GraphStore
from ..graph.values import parse_timestamp
from ..vector.embedding import EmbeddingProvider, HashingEmbedder
from ..vector.hnsw import HnswIndex
from .sources import (
    EVENT_COLUMNS,
    HIERARCHY_COLUMNS,
    READING_COLUMNS,
    Record,
    SourceBundle,
    as_float,
    read_csv,
    read_json_array,
    read_yaml_list,
)

logger = logging.getLogger(__name__)

EVENT_KINDS = ("work_order", "alert", "anomaly")
WO_TYPES = ("preventive", "corrective")
TOPOLOGY_RELS = ("DEPENDS_ON", "SHARES_SYSTEM_WITH")
RULE_OPERATORS = (">", ">=", "<", "<=")


@dataclass
class Rejection:
    source: str
    line: int
    reason: str


@dataclass
class EtlReport:
    node_counts: Dict[str, int] = field(default_factory=dict)
    edge_counts: Dict[str, int] = field(default_factory=dict)
    rejected: List[Rejection] = field(default_factory=list)
    elapsed_s: float = 0.0
    steps: List[Tuple[str, float]] = field(default_factory=list)
    index: Optional[HnswIndex] = field(default=None, repr=False, compare=False)

    def reject(self, rec: Record, reason: str) -> None:
        self.rejected.append(Rejection(rec.source, rec.line, reason))
        logger.warning("rejected %s:%d: %s", rec.source, rec.line, reason)

    def census_matches(self, graph: GraphStore) -> bool:
        nodes, edges = graph.census()
        return nodes == self.node_counts and edges == self.edge_counts

    def to_dict(self) -> Dict[str, Any]:
        return {
            "node_counts": dict(self.node_counts),
            "edge_counts": dict(self.edge_counts),
            "rejected": [asdict(r) for r in self.rejected],
            "elapsed_s": self.elapsed_s,
            "steps": [[n, s] for n, s in self.steps],
        }


class _Builder:
    def __init__(self, graph: GraphStore, report: EtlReport):
        self.g = graph
        self.report = report
        self.sites: Dict[str, str] = {}
        self.locations: Dict[str, str] = {}
        self.equipment: Dict[str, str] = {}
        self.equipment_by_name: Dict[str, str] = {}
        self.sensors: Dict[str, str] = {}
        self.failure_modes: Dict[str, str] = {}
        self.hierarchy_rows: List[Record] = []
        self.fm_rows: List[Record] = []

    # (1)
    def parse_hierarchy(self, bundle: SourceBundle) -> None:
        if bundle.hierarchy is not None:
            self.hierarchy_rows = list(read_csv(bundle.hierarchy, HIERARCHY_COLUMNS))

    # (2)
    def create_hierarchy(self) -> None:
        order = {"site": 0, "location": 1, "equipment": 2}
        rows = []
        for rec in self.hierarchy_rows:
            kind = rec.data.get("kind", "").lower()
            if kind not in order:
                self.report.reject(rec, f"unknown hierarchy kind {rec.data.get('kind')!r}")
                continue
            if not rec.data.get("id"):
                self.report.reject(rec, "missing id")
                continue
            rows.append((order[kind], kind, rec))
        rows.sort(key=lambda t: t[0])  # stable: file order within a kind
        seen: set = set()
        for _, kind, rec in rows:
            d = rec.data
            rid = d["id"]
            if rid in seen:
                self.report.reject(rec, f"duplicate hierarchy id {rid!r}")
                continue
            common = {"name": d.get("name") or rid, "isa95_level": d.get("isa95_level") or None}
            if kind == "site":
                nid = self.g.create_node(["Site"], {"site_id": rid, **common})
                self.sites[rid] = nid
            elif kind == "location":
                parent = self.sites.get(d.get("parent", ""))
                if parent is None:
                    self.report.reject(rec, f"location {rid!r}: unknown site {d.get('parent')!r}")
                    continue
                nid = self.g.create_node(["Location"], {"location_id": rid, "site_id": d["parent"], **common})
                self.g.create_edge("CONTAINS_LOCATION", parent, nid)
                self.locations[rid] = nid
            else:
                parent = self.locations.get(d.get("parent", ""))
                if parent is None:
                    self.report.reject(rec, f"equipment {rid!r}: unknown location {d.get('parent')!r}")
                    continue
                props = {
                    "equipment_id": rid,
                    "location_id": d["parent"],
                    "iso14224_class": d.get("iso14224_class") or None,
                    "equipment_type": d.get("equipment_type") or None,
                    **common,
                }
                nid = self.g.create_node(["Equipment"], props)
                self.g.create_edge("CONTAINS_EQUIPMENT", parent, nid)
                self.equipment[rid] = nid
                self.equipment_by_name[props["name"].lower()] = nid
            seen.add(rid)

    # (3)
    def create_sensors(self, bundle: SourceBundle) -> None:
        if bundle.sensors is None:
            return
        for rec in read_json_array(bundle.sensors):
            d = rec.data
            if "__invalid__" in d:
                self.report.reject(rec, "sensor record is not an object")
                continue
            sid = d.get("sensor_id")
            eq = self.equipment.get(d.get("equipment_id"))
            if not sid or not isinstance(sid, str):
                self.report.reject(rec, "missing sensor_id")
                continue
            if sid in self.sensors:
                self.report.reject(rec, f"duplicate sensor_id {sid!r}")
                continue
            if eq is None:
                self.report.reject(rec, f"sensor {sid!r}: unknown equipment {d.get('equipment_id')!r}")
                continue
            lo, err1 = as_float(d.get("min"))
            hi, err2 = as_float(d.get("max"))
            if err1 or err2:
                self.report.reject(rec, f"sensor {sid!r}: {err1 or err2}")
                continue
            props = {
                "sensor_id": sid,
                "equipment_id": d["equipment_id"],
                "name": d.get("name") or sid,
                "type": d.get("type") or None,
                "unit": d.get("unit") or None,
                "min": lo,
                "max": hi,
            }
            nid = self.g.create_node(["Sensor"], props)
            self.g.create_edge("HAS_SENSOR", eq, nid)
            self.sensors[sid] = nid

    # (4)
    def parse_failure_modes(self, bundle: SourceBundle) -> None:
        if bundle.fmsr is None:
            return
        seen = set()
        for rec in read_yaml_list(bundle.fmsr):
            d = rec.data
            name = d.get("name")
            if "__invalid__" in d or not isinstance(name, str) or not name.strip():
                self.report.reject(rec, "failure mode needs a name")
                continue
            sensors = d.get("sensors") or []
            if not isinstance(sensors, list) or not all(isinstance(s, str) for s in sensors):
                self.report.reject(rec, f"failure mode {name!r}: sensors must be a list of strings")
                continue
            if name.lower() in seen:
                self.report.reject(rec, f"duplicate failure mode {name!r}")
                continue
            seen.add(name.lower())
            self.fm_rows.append(rec)

    # (5)
    def embed_failure_modes(self, embedder: EmbeddingProvider, index_params: Mapping[str, Any]) -> HnswIndex:
        index = HnswIndex(dim=embedder.dim, **index_params)
        texts = [f"{r.data['name']}. {r.data.get('description') or ''}".strip() for r in self.fm_rows]
        vectors = embedder.embed_many(texts) if texts else []
        for k, (rec, vec) in enumerate(zip(self.fm_rows, vectors), start=1):
            d = rec.data
            props = {
                "failure_mode_id": f"FM-{k:02d}",
                "name": d["name"].strip(),
                "description": (d.get("description") or "").strip() or None,
                "sensor_types": ", ".join(s.strip().lower() for s in d.get("sensors") or []) or None,
                "embedding": [float(x) for x in vec],
            }
            nid = self.g.create_node(["FailureMode"], props)
            self.failure_modes[props["name"].lower()] = nid
            index.insert(nid, vec)
        return index

    # (6)
    def link_monitors(self) -> None:
        by_type: Dict[str, List[str]] = {}
        for sid in self.sensors.values():
            t = self.g.node(sid).get("type")
            if isinstance(t, str):
                by_type.setdefault(t.lower(), []).append(sid)
        for rec in self.fm_rows:
            fm = self.failure_modes[rec.data["name"].strip().lower()]
            for t in dict.fromkeys(s.strip().lower() for s in rec.data.get("sensors") or []):
                for sid in by_type.get(t, []):
                    self.g.create_edge("MONITORS", sid, fm)

    # (7)
    def load_events(self, bundle: SourceBundle) -> None:
        if bundle.events is None:
            return
        seen = set()
        experienced: Dict[Tuple[str, str], int] = {}
        for rec in read_csv(bundle.events, EVENT_COLUMNS):
            d = rec.data
            eid = d.get("event_id")
            if not eid:
                self.report.reject(rec, "missing event_id")
                continue
            if eid in seen:
                self.report.reject(rec, f"duplicate event_id {eid!r}")
                continue
            eq = self.equipment.get(d.get("equipment_id"))
            if eq is None:
                self.report.reject(rec, f"event {eid!r}: unknown equipment {d.get('equipment_id')!r}")
                continue
            try:
                ts = parse_timestamp(d.get("timestamp", ""))
            except ValueError as exc:
                self.report.reject(rec, f"event {eid!r}: {exc}")
                continue
            kind = (d.get("kind") or "").lower()
            if kind not in EVENT_KINDS:
                self.report.reject(rec, f"event {eid!r}: unknown kind {d.get('kind')!r}")
                continue
            wo_type = (d.get("wo_type") or "").lower() or None
            if wo_type is not None and wo_type not in WO_TYPES:
                self.report.reject(rec, f"event {eid!r}: unknown wo_type {wo_type!r}")
                continue
            numeric = {}
            bad = None
            for key in ("cost", "duration_hours"):
                numeric[key], err = as_float(d.get(key))
                bad = bad or err
            if bad:
                self.report.reject(rec, f"event {eid!r}: {bad}")
                continue
            due = None
            if d.get("due"):
                try:
                    due = parse_timestamp(d["due"])
                except ValueError as exc:
                    self.report.reject(rec, f"event {eid!r}: due: {exc}")
                    continue
            props = {
                "event_id": eid,
                "timestamp": ts,
                "equipment_id": d["equipment_id"],
                "kind": kind,
                "description": d.get("description") or None,
                "failure_mode": d.get("failure_mode") or None,
                "wo_type": wo_type,
                "status": (d.get("status") or "").lower() or None,
                "cost": numeric["cost"],
                "duration_hours": numeric["duration_hours"],
                "due": due,
            }
            nid = self.g.create_node(["Event"], props)
            self.g.create_edge("FOR_EQUIPMENT", nid, eq)
            seen.add(eid)
            fm_name = props["failure_mode"]
            if fm_name and wo_type == "corrective":
                fm = self.failure_modes.get(fm_name.lower())
                if fm is not None:
                    experienced[(eq, fm)] = experienced.get((eq, fm), 0) + 1
        for (eq, fm), count in experienced.items():
            self.g.create_edge("EXPERIENCED", eq, fm, {"count": count})

    def resolve_equipment(self, ref: Any) -> Optional[str]:
        if not isinstance(ref, str):
            return None
        return self.equipment.get(ref) or self.equipment_by_name.get(ref.strip().lower())

    # optional telemetry
    def load_rules(self, bundle: SourceBundle) -> None:
        if bundle.rules is None:
            return
        seen = set()
        for rec in read_yaml_list(bundle.rules):
            d = rec.data
            rid = d.get("rule_id")
            eq = self.resolve_equipment(d.get("equipment_id"))
            threshold, err = as_float(d.get("threshold"))
            op = d.get("operator")
            if not isinstance(rid, str) or not rid or rid in seen:
                self.report.reject(rec, "rule needs a unique rule_id")
                continue
            if eq is None:
                self.report.reject(rec, f"rule {rid!r}: unknown equipment {d.get('equipment_id')!r}")
                continue
            if err or threshold is None or op not in RULE_OPERATORS:
                self.report.reject(rec, f"rule {rid!r}: needs operator in {RULE_OPERATORS} and a numeric threshold")
                continue
            props = {
                "rule_id": rid,
                "equipment_id": self.g.node(eq).get("equipment_id"),
                "sensor_type": str(d.get("sensor_type") or "").lower() or None,
                "operator": op,
                "threshold": threshold,
                "description": d.get("description") or None,
            }
            nid = self.g.create_node(["MonitoringRule"], props)
            self.g.create_edge("HAS_RULE", eq, nid)
            seen.add(rid)

    def load_readings(self, bundle: SourceBundle) -> None:
        if bundle.readings is None:
            return
        seen = set()
        for rec in read_csv(bundle.readings, READING_COLUMNS):
            d = rec.data
            rid = d.get("reading_id")
            sensor = self.sensors.get(d.get("sensor_id"))
            value, err = as_float(d.get("value"))
            if not rid or rid in seen:
                self.report.reject(rec, "reading needs a unique reading_id")
                continue
            if sensor is None:
                self.report.reject(rec, f"reading {rid!r}: unknown sensor {d.get('sensor_id')!r}")
                continue
            if err or value is None:
                self.report.reject(rec, f"reading {rid!r}: {err or 'missing value'}")
                continue
            try:
                ts = parse_timestamp(d.get("timestamp", ""))
            except ValueError as exc:
                self.report.reject(rec, f"reading {rid!r}: {exc}")
                continue
            props = {"reading_id": rid, "sensor_id": d["sensor_id"], "timestamp": ts, "value": value}
            nid = self.g.create_node(["SensorReading"], props)
            self.g.create_edge("PRODUCED_READING", sensor, nid)
            seen.add(rid)


def apply_topology(
    graph: GraphStore,
    pairs: Iterable[Record],
    report: Optional[EtlReport] = None,
) -> int:
    """Add DEPENDS_ON / SHARES_SYSTEM_WITH edges; returns the number added.

    Endpoints resolve by equipment_id, then by case-insensitive name.
    Repeated pairs collapse, and SHARES_SYSTEM_WITH is symmetric so (a, b)
    and (b, a) count as one.
    """
    report = report if report is not None else EtlReport()
    by_id: Dict[str, str] = {}
    by_name: Dict[str, str] = {}
    for nid in graph.nodes_by_label("Equipment"):
        n = graph.node(nid)
        if isinstance(n.get("equipment_id"), str):
            by_id[n.get("equipment_id")] = nid
        if isinstance(n.get("name"), str):
            by_name.setdefault(n.get("name").lower(), nid)

    def resolve(ref: Any) -> Optional[str]:
        if not isinstance(ref, str):
            return None
        return by_id.get(ref) or by_name.get(ref.strip().lower())

    existing = set()
    for t in TOPOLOGY_RELS:
        for eid in graph.edges_by_type(t):
            e = graph.edge(eid)
            existing.add(_topology_key(t, e.src, e.dst))
    added = 0
    for rec in pairs:
        d = rec.data
        rel = str(d.get("rel", "")).upper()
        if rel not in TOPOLOGY_RELS:
            report.reject(rec, f"unknown topology rel {d.get('rel')!r}")
            continue
        a, b = resolve(d.get("from")), resolve(d.get("to"))
        if a is None or b is None:
            missing = d.get("from") if a is None else d.get("to")
            report.reject(rec, f"topology: unknown equipment {missing!r}")
            continue
        if a == b:
            report.reject(rec, "topology: self dependency")
            continue
        key = _topology_key(rel, a, b)
        if key in existing:
            continue
        existing.add(key)
        graph.create_edge(rel, a, b)
        added += 1
    return added


def _topology_key(rel: str, a: str, b: str) -> Tuple[str, str, str]:
    if rel == "SHARES_SYSTEM_WITH" and b < a:
        a, b = b, a
    return rel, a, b


def build_graph(
    bundle: SourceBundle,
    embedder: Optional[EmbeddingProvider] = None,
    index_params: Optional[Mapping[str, Any]] = None,
) -> Tuple[GraphStore, EtlReport]:
    """Run the eight steps; malformed records become rejections."""
    embedder = embedder or HashingEmbedder()
    graph = GraphStore()
    report = EtlReport()
    b = _Builder(graph, report)
    t0 = time.perf_counter()

    def step(name: str, fn, *args):
        s = time.perf_counter()
        out = fn(*args)
        report.steps.append((name, time.perf_counter() - s))
        return out

    with graph.lock:
        step("parse_hierarchy", b.parse_hierarchy, bundle)
        step("create_hierarchy", b.create_hierarchy)
        step("sensors", b.create_sensors, bundle)
        step("parse_failure_modes", b.parse_failure_modes, bundle)
        report.index = step("embed_index", b.embed_failure_modes, embedder, dict(index_params or {}))
        step("link_monitors", b.link_monitors)
        step("events", b.load_events, bundle)
        topo = list(read_yaml_list(bundle.topology)) if bundle.topology is not None else []
        step("topology", apply_topology, graph, topo, report)
        if bundle.rules is not None or bundle.readings is not None:
            step("rules", b.load_rules, bundle)
            step("readings", b.load_readings, bundle)
    report.node_counts, report.edge_counts = graph.census()
    report.elapsed_s = time.perf_counter() - t0
    logger.info("built graph: %d nodes, %d edges, %d rejected", graph.node_count, graph.edge_count, len(report.rejected))
    return graph, report
