"""Generation-augmented knowledge: fill lookup misses with LLM-emitted CREATEs.

A gap key names an equipment type absent from the graph. On a miss the
client is asked once for CREATE statements; each statement is parsed and
validated before anything runs, valid ones execute with LLM provenance,
and the resulting record is cached per key. Materialized records persist
in the snapshot; rejected ones are kept only in memory so a failed
enrichment leaves the snapshot untouched.
"""

from __future__ import annotations

import hashlib
import logging
import re
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

from .cypher import CypherError, execute_create, parse, validate
from .cypher import ast as A
from .graph.store import GraphError, GraphStore, Provenance
from .graph.values import format_timestamp
from .llm import LlmClient

logger = logging.getLogger(__name__)

# equipment types recognised in questions; aliases map to canonical keys
EQUIPMENT_LEXICON = (
    "electric motor",
    "pump",
    "compressor",
    "fan",
    "steam turbine",
    "gas turbine",
    "generator",
    "transformer",
    "reciprocating engine",
    "boiler",
    "cooling tower",
    "heat exchanger",
    "valve",
    "chiller",
    "air handling unit",
)
ALIASES = {
    "motor": "electric motor",
    "induction motor": "electric motor",
    "ahu": "air handling unit",
    "air handler": "air handling unit",
    "diesel engine": "reciprocating engine",
    "engine": "reciprocating engine",
    "turbine": "gas turbine",
}

ALLOWED_LABELS = frozenset(
    {"Equipment", "FailureMode", "Sensor", "SparePart", "Supplier", "WorkOrder"}
)
ALLOWED_EDGES = frozenset({"EXPERIENCED", "MONITORS", "HAS_SENSOR", "USES_PART", "SUPPLIED_BY", "ADDRESSES"})

_ARTICLES = {"a", "an", "the"}
_FALLBACK = re.compile(
    r"failure modes?\s+(?:of|for)\s+(?:an?\s+|the\s+)?([a-z][a-z \-]{1,40}?)\s*(?:\?|\.|,|$|\bwhen\b|\bif\b|\bin\b|\bthat\b)",
    re.I,
)


def singular(word: str) -> str:
    w = word
    if len(w) <= 3 or w.endswith(("ss", "us", "is")):
        return w
    if w.endswith("ies"):
        return w[:-3] + "y"
    if w.endswith(("ches", "shes", "xes", "sses")):
        return w[:-2]
    if w.endswith("s"):
        return w[:-1]
    return w


def canonicalize(text: str) -> str:
    """Lowercase, strip punctuation and articles, collapse spaces, singularize."""
    words = re.sub(r"[^a-z0-9\- ]+", " ", text.lower()).split()
    while words and words[0] in _ARTICLES:
        words = words[1:]
    words = [singular(w) for w in words]
    key = " ".join(words)
    return ALIASES.get(key, key)


@dataclass(frozen=True)
class GapKey:
    key: str

    def __post_init__(self) -> None:
        if not self.key or canonicalize(self.key) != self.key:
            raise ValueError(f"gap key {self.key!r} is not canonical")

    @classmethod
    def of(cls, text: str) -> "GapKey":
        return cls(canonicalize(text))

    def __str__(self) -> str:
        return self.key


def _lexicon_phrases() -> List[Tuple[str, str]]:
    phrases = [(p, p) for p in EQUIPMENT_LEXICON] + list(ALIASES.items())
    return sorted(phrases, key=lambda t: (-len(t[0]), t[0]))


_PHRASES = _lexicon_phrases()


def extract_equipment_type(question: str) -> Optional[str]:
    """Canonical equipment type named in the question, if any."""
    tokens = " " + " ".join(singular(w) for w in re.sub(r"[^a-z0-9\- ]+", " ", question.lower()).split()) + " "
    best: Optional[Tuple[int, str]] = None
    for phrase, canon in _PHRASES:
        i = tokens.find(f" {phrase} ")
        if i >= 0 and (best is None or i < best[0]):
            best = (i, canon)
    if best is not None:
        return best[1]
    m = _FALLBACK.search(question)
    if m:
        key = canonicalize(m.group(1))
        return key or None
    return None


def is_resident(key: str, graph: GraphStore) -> bool:
    """True when some Equipment or FailureMode node already covers ``key``."""
    for nid in graph.nodes_by_label("Equipment"):
        n = graph.node(nid)
        for prop in ("equipment_type", "iso14224_class", "name"):
            v = n.get(prop)
            if isinstance(v, str) and (canonicalize(v) == key or f" {key} " in f" {canonicalize(v)} "):
                return True
    for nid in graph.nodes_by_label("FailureMode"):
        v = graph.node(nid).get("name")
        if isinstance(v, str) and f" {key} " in f" {canonicalize(v)} ":
            return True
    return False


def detect_gap(question: str, graph: GraphStore) -> Optional[GapKey]:
    key = extract_equipment_type(question)
    if key is None or is_resident(key, graph):
        return None
    return GapKey(key)


# -- records and cache -------------------------------------------------------

MATERIALIZED = "materialized"
PARTIAL = "partial"
REJECTED = "rejected"


@dataclass(frozen=True)
class EnrichmentRecord:
    record_id: str
    gap_key: str
    statements: Tuple[str, ...]
    node_ids: Tuple[str, ...]
    edge_ids: Tuple[str, ...]
    created_at: str
    status: str
    rejected: Tuple[Tuple[str, str], ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "created_at": self.created_at,
            "edge_ids": list(self.edge_ids),
            "gap_key": self.gap_key,
            "node_ids": list(self.node_ids),
            "record_id": self.record_id,
            "rejected": [list(r) for r in self.rejected],
            "statements": list(self.statements),
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "EnrichmentRecord":
        return cls(
            record_id=d["record_id"],
            gap_key=d["gap_key"],
            statements=tuple(d["statements"]),
            node_ids=tuple(d["node_ids"]),
            edge_ids=tuple(d["edge_ids"]),
            created_at=d["created_at"],
            status=d["status"],
            rejected=tuple((a, b) for a, b in d.get("rejected", [])),
        )


class SemanticCache:
    """One record per gap key, with a per-key lock serializing enrichment."""

    def __init__(self, records: Iterable[EnrichmentRecord] = ()):
        self._records: Dict[str, EnrichmentRecord] = {}
        self._locks: Dict[str, threading.Lock] = {}
        self._guard = threading.Lock()
        self.hits = 0
        for r in records:
            self._records[r.gap_key] = r

    def key_lock(self, key: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(key, threading.Lock())

    def get(self, key: str) -> Optional[EnrichmentRecord]:
        return self._records.get(key)

    def put(self, record: EnrichmentRecord) -> None:
        with self._guard:
            if record.gap_key in self._records:
                raise ValueError(f"cache already holds a record for {record.gap_key!r}")
            self._records[record.gap_key] = record

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, key: str) -> bool:
        return key in self._records

    def records(self) -> List[EnrichmentRecord]:
        return list(self._records.values())

    def persistent_records(self) -> List[Dict[str, Any]]:
        return [r.to_dict() for r in self._records.values() if r.status != REJECTED]

    @classmethod
    def from_snapshot(cls, records: Iterable[Dict[str, Any]]) -> "SemanticCache":
        return cls(EnrichmentRecord.from_dict(r) for r in records)


# -- enrichment ---------------------------------------------------------------


def enrichment_prompt(key: str) -> str:
    return (
        "The asset graph has no knowledge about the equipment type below.\n"
        f"Equipment type: {key}\n\n"
        "Emit openCypher CREATE statements, one per line, and nothing else:\n"
        f"1. one (:Equipment {{name, equipment_type: '{key}'}}) node for the type;\n"
        "2. its typical failure modes as (:FailureMode {name, description}) nodes linked by "
        "(equipment)-[:EXPERIENCED]->(failure mode);\n"
        "3. sensors that detect each failure mode as (:Sensor {name, type}) nodes linked by "
        "(sensor)-[:MONITORS]->(failure mode).\n"
        "Each statement must be self-contained; put the whole subgraph in one CREATE if it "
        "needs shared variables.\n"
    )


_STATEMENT_START = re.compile(r"^\s*(CREATE|MATCH|MERGE|DELETE|DETACH|SET|REMOVE|RETURN|CALL|WITH|UNWIND)\b", re.I)


def split_statements(text: str) -> List[str]:
    fence = re.search(r"```[A-Za-z]*\n?(.*?)```", text, re.S)
    body = fence.group(1) if fence else text
    out: List[str] = []
    cur: List[str] = []
    for line in body.splitlines():
        for piece in re.split(r"(;)", line):
            if piece == ";":
                if cur:
                    out.append(" ".join(cur).strip())
                    cur = []
                continue
            if not piece.strip():
                continue
            if _STATEMENT_START.match(piece) and cur:
                out.append(" ".join(cur).strip())
                cur = []
            cur.append(piece.strip())
    if cur:
        out.append(" ".join(cur).strip())
    return [s for s in out if s]


def check_statement(text: str) -> A.CreateQuery:
    """Parse, validate and vet one statement; raises ValueError on rejection."""
    try:
        q = validate(parse(text))
    except CypherError as exc:
        raise ValueError(str(exc)) from None
    if not isinstance(q, A.CreateQuery):
        raise ValueError("only CREATE statements may enrich the graph")
    for path in q.patterns:
        for n in path.nodes:
            bad = [lb for lb in n.labels if lb not in ALLOWED_LABELS]
            if bad:
                raise ValueError(f"label {bad[0]!r} is not allowed in enrichment")
        for r in path.rels:
            if r.types[0] not in ALLOWED_EDGES:
                raise ValueError(f"relationship {r.types[0]!r} is not allowed in enrichment")
    return q


def _record_id(key: str, statements: Iterable[str]) -> str:
    h = hashlib.sha256((key + "\n" + "\n".join(statements)).encode("utf-8")).hexdigest()
    return "gak-" + h[:16]


def _now() -> str:
    return format_timestamp(datetime.now(timezone.utc))


def enrich(
    gap: GapKey,
    client: LlmClient,
    graph: GraphStore,
    cache: SemanticCache,
    embedder=None,
    index=None,
    clock: Callable[[], str] = _now,
) -> EnrichmentRecord:
    """Materialize the gap once; later calls return the cached record."""
    key = gap.key
    with cache.key_lock(key):
        hit = cache.get(key)
        if hit is not None:
            cache.hits += 1
            return hit
        comp = client.complete(enrichment_prompt(key), temperature=0.0, max_tokens=2048)
        statements = split_statements(comp.text)
        checked: List[Tuple[str, A.CreateQuery]] = []
        rejected: List[Tuple[str, str]] = []
        for s in statements:
            try:
                checked.append((s, check_statement(s)))
            except ValueError as exc:
                rejected.append((s, str(exc)))
        node_ids: List[str] = []
        edge_ids: List[str] = []
        if checked:
            with graph.lock:
                for s, q in checked:
                    try:
                        res = execute_create(q, graph, Provenance.LLM)
                    except (CypherError, GraphError) as exc:
                        rejected.append((s, str(exc)))
                        continue
                    node_ids.extend(res.node_ids)
                    edge_ids.extend(res.edge_ids)
                _index_failure_modes(graph, node_ids, embedder, index)
        if not node_ids and not edge_ids:
            status = REJECTED
        elif rejected:
            status = PARTIAL
        else:
            status = MATERIALIZED
        record = EnrichmentRecord(
            record_id=_record_id(key, statements),
            gap_key=key,
            statements=tuple(statements),
            node_ids=tuple(node_ids),
            edge_ids=tuple(edge_ids),
            created_at=clock(),
            status=status,
            rejected=tuple(rejected),
        )
        cache.put(record)
        logger.info("enrichment %s for %r: %s, %d nodes", record.record_id, key, status, len(node_ids))
        return record


def _index_failure_modes(graph: GraphStore, node_ids: List[str], embedder, index) -> None:
    if embedder is None:
        return
    for nid in node_ids:
        n = graph.node(nid)
        if "FailureMode" not in n.labels or not isinstance(n.get("name"), str):
            continue
        vec = embedder.embed(f"{n.get('name')}. {n.get('description') or ''}".strip())
        graph.set_property(nid, "embedding", [float(x) for x in vec])
        if index is not None and nid not in index:
            index.insert(nid, vec)
