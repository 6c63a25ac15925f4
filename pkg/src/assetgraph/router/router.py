"""Tier selection and the answer envelope.

Order of resolution for ``tier="auto"``:

1. the first matching deterministic handler whose extraction succeeds;
2. a knowledge gap (equipment type absent from the graph) goes to GAK,
   then the question is routed again over the enriched graph;
3. otherwise text-to-Cypher (NLQ).

Without an LLM client, steps 2 and 3 refuse with a trace explaining why.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field, is_dataclass, asdict
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..cypher import CypherError
from ..gak import REJECTED, GapKey, SemanticCache, detect_gap, enrich
from ..graph import snapshot
from ..graph.store import GraphStore, Node
from ..graph.values import format_timestamp
from ..llm import LlmClient, LlmError
from ..nlq import NlqError, answer_nlq
from ..vector import HashingEmbedder, HnswIndex
from .handlers import Context, ExtractionError, HandlerSpec, UnknownEquipment, handler_catalog
from .resolver import Resolver

logger = logging.getLogger(__name__)

TIERS = ("auto", "det", "nlq", "gak")
DETERMINISTIC, NLQ, GAK, REFUSED = "deterministic", "nlq", "gak", "refused"


def to_jsonable(value: Any) -> Any:
    if isinstance(value, datetime):
        return format_timestamp(value)
    if isinstance(value, Node):
        props = {k: to_jsonable(v) for k, v in value.properties.items() if k != "embedding"}
        return {"id": value.id, "labels": sorted(value.labels), "properties": props}
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [to_jsonable(v) for v in items]
    if is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(asdict(value))
    if hasattr(value, "item") and callable(value.item):  # numpy scalars
        return to_jsonable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


@dataclass
class Answer:
    question: str
    text: str
    tier: str
    trace: List[str] = field(default_factory=list)
    payload: Dict[str, Any] = field(default_factory=dict)
    value: Any = None
    handler: Optional[str] = None
    category: Optional[str] = None
    latency_ms: float = 0.0
    enrichment_id: Optional[str] = None

    @property
    def refused(self) -> bool:
        return self.tier == REFUSED

    def envelope(self) -> Dict[str, Any]:
        return {
            "answer": self.text,
            "tier": self.tier,
            "trace": list(self.trace),
            "latency_ms": round(self.latency_ms, 3),
            "payload": to_jsonable(self.payload),
            "value": to_jsonable(self.value),
            "handler": self.handler,
            "enrichment_id": self.enrichment_id,
        }

    def to_json(self) -> str:
        return json.dumps(self.envelope(), sort_keys=True, ensure_ascii=False)


@dataclass
class RouteDecision:
    tier: str
    handler: Optional[HandlerSpec] = None
    params: Optional[Dict[str, Any]] = None
    gap: Optional[GapKey] = None
    notes: List[str] = field(default_factory=list)


class Workspace:
    """Graph, vector index, enrichment cache and the optional LLM client."""

    def __init__(
        self,
        graph: GraphStore,
        cache: Optional[SemanticCache] = None,
        client: Optional[LlmClient] = None,
        embedder=None,
        index: Optional[HnswIndex] = None,
        settings: Optional[Dict[str, Any]] = None,
    ):
        self.graph = graph
        self.cache = cache if cache is not None else SemanticCache()
        self.client = client
        self.embedder = embedder if embedder is not None else HashingEmbedder()
        self.index = index if index is not None else HnswIndex.from_graph(graph, dim=self.embedder.dim)
        self.settings = dict(settings or {})
        self._resolver: Optional[Resolver] = None

    @classmethod
    def load(cls, path: Union[str, Path], client: Optional[LlmClient] = None, **kw) -> "Workspace":
        snap = snapshot.load(path)
        return cls(snap.graph, SemanticCache.from_snapshot(snap.records), client, **kw)

    def save(self, path: Union[str, Path]) -> None:
        snapshot.save(self.graph, path, self.cache.persistent_records())

    @property
    def resolver(self) -> Resolver:
        if self._resolver is None or self._resolver.stale():
            self._resolver = Resolver(self.graph)
        return self._resolver

    def context(self) -> Context:
        return Context(self.graph, self.resolver, self.index, self.settings)


class Router:
    def __init__(self, workspace: Workspace, catalog: Optional[List[HandlerSpec]] = None):
        self.ws = workspace
        self.catalog = catalog if catalog is not None else handler_catalog()

    # -- decisions ---------------------------------------------------------

    def match(self, question: str) -> Optional[HandlerSpec]:
        for h in self.catalog:
            if h.matches(question):
                return h
        return None

    def route(self, question: str) -> RouteDecision:
        """Which tier would answer, independent of whether an LLM client is set."""
        notes: List[str] = []
        h = self.match(question)
        if h is not None:
            try:
                params = h.extract(question, self.ws.context())
                return RouteDecision(DETERMINISTIC, h, params, notes=[f"handler:{h.name}"])
            except UnknownEquipment as exc:
                # a well-formed id that matches nothing is an empty answer, not a miss
                return RouteDecision(DETERMINISTIC, h, {"absent": exc.ident},
                                     notes=[f"handler:{h.name}", f"lookup: {exc}"])
            except ExtractionError as exc:
                notes.append(f"handler:{h.name} matched but extraction failed: {exc}")
        else:
            notes.append("no deterministic handler matched")
        gap = detect_gap(question, self.ws.graph)
        if gap is not None:
            notes.append(f"knowledge gap: {gap.key}")
            return RouteDecision(GAK, gap=gap, notes=notes)
        return RouteDecision(NLQ, notes=notes)

    # -- answering ---------------------------------------------------------

    def answer(self, question: str, tier: str = "auto") -> Answer:
        if tier not in TIERS:
            raise ValueError(f"tier must be one of {', '.join(TIERS)}")
        t0 = time.perf_counter()
        try:
            ans = self._answer(question.strip(), tier)
        except LlmError as exc:
            ans = Answer(question, f"The language model is unavailable: {exc}", REFUSED, [f"llm error: {exc}"])
        ans.latency_ms = (time.perf_counter() - t0) * 1000.0
        return ans

    def _answer(self, question: str, tier: str, allow_gak: bool = True) -> Answer:
        if tier == "nlq":
            return self._nlq(question, [])
        if tier == "gak":
            gap = detect_gap(question, self.ws.graph)
            if gap is None:
                return Answer(question, "No knowledge gap: the graph already covers this question.", REFUSED,
                              ["gak: no gap detected"])
            return self._gak(question, gap, [])
        decision = self.route(question)
        if decision.tier == DETERMINISTIC:
            return self._run(question, decision)
        if tier == "det":
            return Answer(question, "No deterministic handler can answer this question.", REFUSED, decision.notes)
        if decision.tier == GAK and allow_gak:
            return self._gak(question, decision.gap, decision.notes)
        return self._nlq(question, decision.notes)

    def _run(self, question: str, decision: RouteDecision) -> Answer:
        h = decision.handler
        if set(decision.params or {}) == {"absent"}:
            ident = decision.params["absent"]
            return Answer(question, f"No equipment with id {ident} exists in the graph, so there are no matching results.",
                          DETERMINISTIC, list(decision.notes), {"equipment_id": ident, "rows": []}, [], h.name, h.category)
        ctx = self.ws.context()
        try:
            res = h.act(decision.params, ctx)
        except (ExtractionError, CypherError) as exc:
            return Answer(question, f"The {h.name} handler could not answer: {exc}", REFUSED,
                          decision.notes + ctx.trace + [f"error: {exc}"], handler=h.name, category=h.category)
        return Answer(question, res.text, DETERMINISTIC, decision.notes + ctx.trace + res.trace, res.payload,
                      res.value, h.name, h.category)

    def _gak(self, question: str, gap: GapKey, notes: List[str]) -> Answer:
        if self.ws.client is None:
            return Answer(question, f"The graph has no knowledge of '{gap.key}' and no LLM client is configured.",
                          REFUSED, notes + ["gak: no LLM client"])
        rec = enrich(gap, self.ws.client, self.ws.graph, self.ws.cache, self.ws.embedder, self.ws.index)
        trace = notes + [f"gak: record {rec.record_id} status {rec.status}, {len(rec.node_ids)} nodes, {len(rec.edge_ids)} edges"]
        if rec.status == REJECTED:
            return Answer(question, f"Enrichment for '{gap.key}' was rejected; no facts were added.", REFUSED,
                          trace + [f"gak rejected: {reason}" for _, reason in rec.rejected], enrichment_id=rec.record_id)
        inner = self._answer(question, "auto", allow_gak=False)
        tier = GAK if inner.tier == DETERMINISTIC else inner.tier
        return Answer(question, inner.text, tier, trace + inner.trace, inner.payload, inner.value, inner.handler,
                      inner.category, enrichment_id=rec.record_id)

    def _nlq(self, question: str, notes: List[str]) -> Answer:
        if self.ws.client is None:
            return Answer(question, "No deterministic handler can answer this question and no LLM client is configured.",
                          REFUSED, notes + ["nlq: no LLM client"])
        try:
            out = answer_nlq(question, self.ws.graph, self.ws.client)
        except NlqError as exc:
            return Answer(question, str(exc), REFUSED, notes + [f"nlq error: {exc}"])
        trace = list(notes)
        for i, att in enumerate(out.attempts):
            trace.append(f"cypher: {att.query}")
            if att.error:
                trace.append(f"attempt {i + 1} error: {att.error}")
        if out.ok and out.result is not None and out.result.plan is not None:
            trace.append("plan: " + " -> ".join(out.result.plan.describe()))
        payload: Dict[str, Any] = {"retries": out.retries, "query": out.final_query,
                                   "prompt_tokens": out.prompt_tokens, "completion_tokens": out.completion_tokens}
        if out.ok and out.result is not None:
            payload["columns"] = list(out.result.columns)
            payload["rows"] = [list(r) for r in out.result.rows]
            value = out.result.rows[0][0] if len(out.result.rows) == 1 and len(out.result.columns) == 1 \
                else [r[0] for r in out.result.rows]
            return Answer(question, out.answer, NLQ, trace, payload, value, "nlq", None)
        payload["errors"] = out.errors
        payload["failure"] = out.failure
        payload["unsupported"] = out.unsupported
        text = ("This question needs a graph algorithm that no handler covers."
                if out.unsupported else f"Could not answer: {out.failure}")
        return Answer(question, text, REFUSED, trace, payload, None, "nlq", None)
