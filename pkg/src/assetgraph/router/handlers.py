"""Deterministic handlers: one per supported question pattern.

Each handler pairs a trigger (regexes over the question) with an extractor
and an action. Extraction pulls the parameters the action needs; when it
fails the router falls through to gap detection and NLQ. Actions answer
with a text, a JSON-friendly payload, a canonical ``value`` used for
scoring and a trace of the queries and algorithms that ran.
"""

from __future__ import annotations

import bisect
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .. import analytics
from ..cypher import ResultTable, run
from ..gak import canonicalize, extract_equipment_type, singular
from ..graph.store import Direction, GraphStore, Node
from ..graph.values import format_timestamp, parse_timestamp
from ..vector import HnswIndex
from .resolver import Mention, Resolver, hours_phrase, names, top_n, year_window


class ExtractionError(ValueError):
    """The question matched a handler but its parameters could not be resolved."""


class UnknownEquipment(ExtractionError):
    """The question names an equipment id the graph does not hold."""

    def __init__(self, ident: str):
        self.ident = ident
        super().__init__(f"equipment {ident} is not in the graph")


@dataclass
class HandlerResult:
    text: str
    value: Any = None
    payload: Dict[str, Any] = field(default_factory=dict)
    trace: List[str] = field(default_factory=list)


@dataclass
class Context:
    graph: GraphStore
    resolver: Resolver
    index: Optional[HnswIndex] = None
    settings: Dict[str, Any] = field(default_factory=dict)
    trace: List[str] = field(default_factory=list)

    def setting(self, key: str) -> Any:
        return self.settings.get(key, DEFAULT_SETTINGS[key])

    def query(self, text: str) -> ResultTable:
        table = run(self.graph, text)
        self.trace.append(f"cypher: {text}")
        if table.plan is not None:
            self.trace.append("plan: " + " -> ".join(table.plan.describe()))
        return table

    def algorithm(self, text: str) -> None:
        self.trace.append(f"algorithm: {text}")

    def node(self, nid: str) -> Node:
        return self.graph.node(nid)

    def label(self, nid: str) -> str:
        return str(self.graph.node(nid).get("name", nid))


DEFAULT_SETTINGS: Dict[str, Any] = {
    "root_cause_lookback_hours": 72.0,
    "correlation_window_hours": 12.0,
    "bundle_window_days": 7.0,
    "schedule_horizon_hours": 168,
    "schedule_population": 64,
    "schedule_generations": 100,
    "schedule_seed": 0,
    "schedule_crews": 2,
    "schedule_surge_rate": 250.0,
    "similarity_k": 3,
}


@dataclass(frozen=True)
class HandlerSpec:
    name: str
    category: str
    triggers: Tuple[str, ...]
    extract: Callable[[str, Context], Dict[str, Any]]
    act: Callable[[Dict[str, Any], Context], HandlerResult]
    excludes: Tuple[str, ...] = ()

    def matches(self, question: str) -> bool:
        if any(re.search(p, question, re.I) for p in self.excludes):
            return False
        return any(re.search(p, question, re.I) for p in self.triggers)


# -- shared helpers ----------------------------------------------------------


def _q(text: str) -> str:
    return "'" + text.replace("\\", "\\\\").replace("'", "\\'") + "'"


def _ts(dt: datetime) -> str:
    return format_timestamp(dt)


def _mentions(text: str, ctx: Context) -> List[Mention]:
    """Known equipment mentions; an id-shaped token naming nothing raises."""
    found = ctx.resolver.equipment(text)
    if not found:
        missing = ctx.resolver.unknown_ids(text)
        if missing:
            raise UnknownEquipment(missing[0])
    return found


def _equipment(question: str, ctx: Context, required: bool = True) -> Optional[Mention]:
    found = _mentions(question, ctx)
    if found:
        return found[0]
    if required:
        raise ExtractionError("no known equipment is named in the question")
    return None


def _events(ctx: Context, eq_nid: str) -> List[Node]:
    evs = [ev for _, ev in ctx.graph.neighbors(eq_nid, ["FOR_EQUIPMENT"], Direction.IN)]
    evs.sort(key=lambda e: (e.get("timestamp"), e.seq))
    return evs


def _eq_name(ctx: Context, equipment_id: Any) -> str:
    nid = ctx.resolver.by_id.get(str(equipment_id).upper())
    return ctx.label(nid) if nid is not None else str(equipment_id)


def _fmt(v: Any) -> str:
    return _ts(v) if isinstance(v, datetime) else str(v)


def _fmt_hours(h: float) -> str:
    return f"{h:.2f} hours ({h / 24.0:.1f} days)"


def _window_text(window) -> str:
    if window is None:
        return ""
    start, end = window
    parts = []
    if start is not None:
        parts.append(f"from {_ts(start)[:10]}")
    if end is not None:
        parts.append(f"before {_ts(end)[:10]}")
    return " " + " ".join(parts)


def _types_outside(question: str, ctx: Context, mentions: Sequence[Mention]) -> List[str]:
    spans = [(m.start, m.start + len(m.text)) for m in mentions]
    return [k for k, pos in ctx.resolver.type_mentions(question) if not any(a <= pos < b for a, b in spans)]


# -- root cause --------------------------------------------------------------

_WO_ID = re.compile(r"\bWO-\d{4}-\d{4}\b", re.I)


def _extract_root_cause(question: str, ctx: Context) -> Dict[str, Any]:
    m = _WO_ID.search(question)
    if not m:
        raise ExtractionError("root-cause questions need a work-order id such as WO-2024-0042")
    lookback = hours_phrase(question) or ctx.setting("root_cause_lookback_hours")
    return {"wo": m.group(0).upper(), "lookback": float(lookback)}


def _root_cause(p: Dict[str, Any], ctx: Context) -> HandlerResult:
    wo, lookback = p["wo"], p["lookback"]
    t = ctx.query(
        f"MATCH (w:Event {{event_id: {_q(wo)}}})-[:FOR_EQUIPMENT]->(q:Equipment) RETURN w, q"
    )
    if not t.rows:
        return HandlerResult(f"No work order {wo} exists in the graph.", [], {"work_order": wo, "events": []})
    w, q = t.rows[0]
    at = w.get("timestamp")
    ups = analytics.upstream(ctx.graph, q.id)
    ctx.algorithm(f"upstream DEPENDS_ON from {q.get('equipment_id')}: {len(ups.affected)} nodes")
    scope = [q.id] + ups.ids
    start = at - timedelta(hours=lookback)
    found: List[Node] = []
    for nid in scope:
        for ev in _events(ctx, nid):
            ts = ev.get("timestamp")
            if start <= ts < at and ev.id != w.id:
                found.append(ev)
    found.sort(key=lambda e: (e.get("timestamp"), e.seq))
    ctx.algorithm(f"temporal window [{_ts(start)}, {_ts(at)}) over {len(scope)} equipment")
    head = (
        f"{wo} ({q.get('name')}, {w.get('wo_type')}"
        + (f": {w.get('failure_mode')}" if w.get("failure_mode") else "")
        + f") at {_ts(at)}."
    )
    scope_text = q.get("name") + (f" and its upstream equipment ({', '.join(names(ctx.graph, ups.ids))})" if ups.ids else "")
    if not found:
        text = f"{head} No events precede it within {lookback:g} h on {scope_text}."
    else:
        lines = [
            f"- {e.get('event_id')} {_ts(e.get('timestamp'))} {_eq_name(ctx, e.get('equipment_id'))} {e.get('kind')}: {e.get('description', '')}"
            for e in found
        ]
        text = f"{head} {len(found)} events within {lookback:g} h before it on {scope_text}:\n" + "\n".join(lines)
    ids = [str(e.get("event_id")) for e in found]
    payload = {
        "work_order": wo,
        "equipment": q.get("equipment_id"),
        "timestamp": _ts(at),
        "lookback_hours": lookback,
        "equipment_name": q.get("name"),
        "upstream": [ctx.node(i).get("equipment_id") for i in ups.ids],
        "upstream_names": names(ctx.graph, ups.ids),
        "events": [
            {"event_id": e.get("event_id"), "timestamp": _ts(e.get("timestamp")), "equipment_id": e.get("equipment_id"),
             "kind": e.get("kind"), "description": e.get("description")}
            for e in found
        ],
    }
    return HandlerResult(text, ids, payload)


# -- maintenance scheduling --------------------------------------------------


def _open_work_orders(ctx: Context, eq_ids: Optional[Sequence[str]] = None) -> List[Node]:
    t = ctx.query("MATCH (e:Event {kind: 'work_order', status: 'open'}) RETURN e ORDER BY e.timestamp, e.event_id")
    rows = [r[0] for r in t.rows]
    if eq_ids:
        wanted = set(eq_ids)
        rows = [e for e in rows if e.get("equipment_id") in wanted]
    return rows


def _extract_schedule(question: str, ctx: Context) -> Dict[str, Any]:
    mentions = _mentions(question, ctx)
    eq = [str(ctx.node(m.node_id).get("equipment_id")) for m in mentions]
    horizon = hours_phrase(question)
    return {"equipment": eq, "horizon": int(horizon) if horizon else int(ctx.setting("schedule_horizon_hours"))}


def _schedule(p: Dict[str, Any], ctx: Context) -> HandlerResult:
    wos = _open_work_orders(ctx, p["equipment"])
    if not wos:
        return HandlerResult("There are no open work orders to schedule.", [], {"plans": []})
    latest = max(e.get("timestamp") for e in wos)
    origin = latest.replace(hour=0, minute=0, second=0, microsecond=0) + timedelta(days=1)
    specs = []
    for e in wos:
        dur = int(math.ceil(float(e.get("duration_hours") or 1.0)))
        due = e.get("due")
        due_dt = parse_timestamp(due) if isinstance(due, str) else due if isinstance(due, datetime) else None
        latest_start = int((due_dt - origin).total_seconds() // 3600) - dur if due_dt else p["horizon"]
        specs.append(
            analytics.WorkOrderSpec(str(e.get("event_id")), str(e.get("equipment_id")), dur,
                                   float(e.get("cost") or 0.0), 0, latest_start)
        )
    dependents: Dict[str, frozenset] = {}
    for eid in {s.equipment for s in specs}:
        nid = ctx.resolver.by_id.get(eid.upper())
        if nid is not None:
            dependents[eid] = frozenset(str(ctx.node(i).get("equipment_id")) for i in analytics.cascade(ctx.graph, nid).ids)
    res = analytics.nsga2_schedule(
        specs, p["horizon"],
        population=int(ctx.setting("schedule_population")),
        generations=int(ctx.setting("schedule_generations")),
        seed=int(ctx.setting("schedule_seed")),
        dependents=dependents, origin=origin,
        crews=int(ctx.setting("schedule_crews")), surge_rate=float(ctx.setting("schedule_surge_rate")),
    )
    ctx.algorithm(
        f"NSGA-II over {len(specs)} open work orders, horizon {p['horizon']} h from {_ts(origin)}, "
        f"{res.generations} generations, {res.evaluations} evaluations"
    )
    payload: Dict[str, Any] = {
        "origin": _ts(origin),
        "horizon_hours": p["horizon"],
        "work_orders": [
            {"id": s.id, "equipment": s.equipment, "duration": s.duration, "cost": s.cost, "latest_start": s.latest_start}
            for s in specs
        ],
        "dependents": {k: sorted(v) for k, v in sorted(dependents.items())},
        "crews": int(ctx.setting("schedule_crews")),
        "surge_rate": float(ctx.setting("schedule_surge_rate")),
        "feasible": res.feasible,
        "plans": [
            {"downtime": pl.downtime, "cost": pl.cost, "starts": dict(sorted(pl.assignments.items())),
             "start_times": {k: _ts(v) for k, v in sorted(pl.start_times.items())}}
            for pl in res.plans
        ],
    }
    if not res.feasible:
        return HandlerResult(f"No feasible schedule exists: {res.reason}.", [], payload)
    front = [list(f) for f in res.front]
    best_d = min(res.plans, key=lambda pl: (pl.downtime, pl.cost))
    best_c = min(res.plans, key=lambda pl: (pl.cost, pl.downtime))

    def describe(pl) -> str:
        starts = ", ".join(f"{k} at {_ts(v)}" for k, v in sorted(pl.start_times.items(), key=lambda kv: kv[1]))
        return f"downtime {pl.downtime:g} h, cost {pl.cost:g} ({starts})"

    text = (
        f"{len(front)} Pareto-optimal schedules for {len(specs)} open work orders.\n"
        f"Lowest downtime: {describe(best_d)}.\nLowest cost: {describe(best_c)}."
    )
    return HandlerResult(text, front, payload)


# -- monitoring rules --------------------------------------------------------

_OPS = {">": lambda a, b: a > b, ">=": lambda a, b: a >= b, "<": lambda a, b: a < b,
        "<=": lambda a, b: a <= b, "==": lambda a, b: a == b, "!=": lambda a, b: a != b}


def _extract_rules(question: str, ctx: Context) -> Dict[str, Any]:
    m = _equipment(question, ctx, required=False)
    return {"equipment": m.node_id if m else None}


def _rules(p: Dict[str, Any], ctx: Context) -> HandlerResult:
    t = ctx.query("MATCH (q:Equipment)-[:HAS_RULE]->(r:MonitoringRule) RETURN q, r ORDER BY r.rule_id")
    rows = [(q, r) for q, r in t.rows if p["equipment"] is None or q.id == p["equipment"]]
    if not rows:
        return HandlerResult("No monitoring rules are loaded for that scope.", [], {"rules": []})
    flagged: List[str] = []
    details = []
    lines = []
    for q, r in rows:
        stype = str(r.get("sensor_type", "")).lower()
        op = _OPS.get(str(r.get("operator")))
        thr = r.get("threshold")
        hits = []
        for _, s in ctx.graph.neighbors(q.id, ["HAS_SENSOR"], Direction.OUT):
            if str(s.get("type", "")).lower() != stype:
                continue
            for _, rd in ctx.graph.neighbors(s.id, ["PRODUCED_READING"], Direction.OUT):
                v = rd.get("value")
                if op is not None and isinstance(v, (int, float)) and op(v, thr):
                    hits.append(rd)
        hits.sort(key=lambda x: (x.get("timestamp"), x.seq))
        ids = [str(h.get("reading_id", h.id)) for h in hits]
        flagged.extend(ids)
        details.append({"rule_id": r.get("rule_id"), "equipment": q.get("equipment_id"), "sensor_type": stype,
                        "operator": r.get("operator"), "threshold": thr, "violations": ids})
        lines.append(f"- {r.get('rule_id')} ({q.get('name')} {stype} {r.get('operator')} {thr}): {len(ids)} violating readings")
    ctx.algorithm(f"rule evaluation over {len(rows)} rules")
    text = f"{len(flagged)} readings violate {len(rows)} monitoring rules:\n" + "\n".join(lines)
    return HandlerResult(text, flagged, {"rules": details})


# -- cross-asset correlation -------------------------------------------------

_CORR_SPLIT = re.compile(r"\bcorrelat\w*\s+(?:with|to)\b|\bfollow\w*\b|\bprecede\w*\b|\blead\w* to\b", re.I)
_STOP = {
    "do", "does", "are", "is", "the", "a", "an", "of", "on", "in", "any", "there", "by", "and", "or", "with",
    "to", "what", "which", "how", "often", "event", "events", "reading", "readings", "usually", "typically",
    "get", "gets", "tend", "generally", "from", "for", "hour", "hours", "within", "day", "days", "after", "before",
}
_KIND_WORDS = {"anomaly": "anomaly", "anomalie": "anomaly", "anomalous": "anomaly", "alert": "alert", "alarm": "alert"}


def _side(text: str, ctx: Context) -> Dict[str, Any]:
    mentions = _mentions(text, ctx)
    eq_ids = [m.node_id for m in mentions]
    types = _types_outside(text, ctx, mentions)
    if not eq_ids and types:
        eq_ids = [nid for k in types for nid in ctx.resolver.types.get(k, [])]
    stripped = text
    for m in mentions:
        stripped = stripped.replace(m.text, " ")
    words = [singular(w) for w in re.findall(r"[a-z]+", stripped.lower())]
    type_words = {w for k in types for w in k.split()} | {"ahu", "equipment"}
    kind = None
    content = []
    for w in words:
        if w in _KIND_WORDS:
            kind = _KIND_WORDS[w]
        elif w in ("work", "order", "failure"):
            kind = "failure"
        elif w not in _STOP and w not in type_words and not w.isdigit():
            content.append(w)
    who = [m.text for m in mentions] or types
    label = " ".join(x for x in (" / ".join(who), " ".join(content), {"failure": "failure", None: ""}.get(kind, kind)) if x)
    return {"equipment": eq_ids, "kind": kind, "words": content, "text": label or "any"}


def _side_events(side: Dict[str, Any], ctx: Context) -> List[Node]:
    scope = side["equipment"] or ctx.graph.nodes_by_label("Equipment")
    phrase = " ".join(side["words"])
    out = []
    for nid in scope:
        for ev in _events(ctx, nid):
            kind = ev.get("kind")
            if side["kind"] == "failure":
                if not (kind == "work_order" and ev.get("wo_type") == "corrective"):
                    continue
            elif side["kind"] is not None and kind != side["kind"]:
                continue
            if phrase:
                desc = " ".join(singular(w) for w in re.findall(r"[a-z]+", str(ev.get("description", "")).lower()))
                if phrase not in desc:
                    continue
            out.append(ev)
    out.sort(key=lambda e: (e.get("timestamp"), e.seq))
    return out


def _extract_correlation(question: str, ctx: Context) -> Dict[str, Any]:
    m = _CORR_SPLIT.search(question)
    if not m:
        m2 = re.search(r"\bbetween\s+(.+?)\s+and\s+(.+)$", question, re.I)
        if not m2:
            raise ExtractionError("could not split the question into two event groups")
        left, right, follower_first = m2.group(1), m2.group(2), True
    else:
        left, right = question[: m.start()], question[m.end():]
        word = m.group(0).lower()
        # "A correlated with B" and "A follow B": A is the follower
        follower_first = not (word.startswith("preced") or word.startswith("lead"))
    right = re.sub(r"\bwithin\s+\d+\s*(?:hours?|h|days?)\b", " ", right, flags=re.I)
    a, b = (_side(left, ctx), _side(right, ctx)) if follower_first else (_side(right, ctx), _side(left, ctx))
    if not (a["equipment"] or a["kind"] or a["words"]) or not (b["equipment"] or b["kind"] or b["words"]):
        raise ExtractionError("one side of the correlation names no events")
    window = hours_phrase(question) or ctx.setting("correlation_window_hours")
    return {"follower": a, "leader": b, "window": float(window)}


def _pearson(x: np.ndarray, y: np.ndarray) -> Optional[float]:
    if len(x) < 2 or x.std() == 0 or y.std() == 0:
        return None
    return float(np.corrcoef(x, y)[0, 1])


def _correlation(p: Dict[str, Any], ctx: Context) -> HandlerResult:
    fol = _side_events(p["follower"], ctx)
    lead = _side_events(p["leader"], ctx)
    w = timedelta(hours=p["window"])
    lt = [e.get("timestamp") for e in lead]
    following = 0
    for ev in fol:
        t = ev.get("timestamp")
        j = bisect.bisect_left(lt, t)
        if j > 0 and t - lt[j - 1] <= w:
            following += 1
    n_f, n_l = len(fol), len(lead)
    ctx.algorithm(f"temporal join: {n_f} follower events, {n_l} leader events, window {p['window']:g} h")
    if not fol or not lead:
        value = {"correlated": False, "following": following, "total": n_f}
        return HandlerResult(
            f"Not enough events to correlate ({n_f} follower events, {n_l} leader events).", value,
            {"following": following, "followers": n_f, "leaders": n_l, "window_hours": p["window"]},
        )
    t_all = sorted(lt + [e.get("timestamp") for e in fol])
    span = (t_all[-1] - t_all[0]).total_seconds()
    covered = 0.0
    cur_s, cur_e = None, None
    for t in lt:
        s, e = t, t + w
        if cur_e is None or s > cur_e:
            if cur_e is not None:
                covered += (cur_e - cur_s).total_seconds()
            cur_s, cur_e = s, e
        else:
            cur_e = max(cur_e, e)
    covered += (cur_e - cur_s).total_seconds()
    p_cov = min(covered / span, 1.0) if span > 0 else 1.0
    rate = following / n_f
    lift = rate / p_cov if p_cov > 0 else None
    day0 = t_all[0].date()
    days = (t_all[-1].date() - day0).days + 1
    xf = np.zeros(days)
    xl = np.zeros(days)
    for e in fol:
        xf[(e.get("timestamp").date() - day0).days] += 1
    for t in lt:
        xl[(t.date() - day0).days] += 1
    r = _pearson(xf, xl)
    correlated = lift is not None and lift >= 2.0 and following >= 5
    ctx.algorithm(f"lift over window coverage baseline ({p_cov:.4f}); daily Pearson r")
    verdict = "Yes" if correlated else "No clear"
    r_text = f"{r:.3f}" if r is not None else "undefined"
    text = (
        f"{verdict} correlation: {following} of {n_f} {p['follower']['text']} events occur within "
        f"{p['window']:g} h after one of {n_l} {p['leader']['text']} events "
        f"({rate:.1%} versus {p_cov:.1%} expected by chance, lift {lift:.2f}; daily count correlation r = {r_text})."
    )
    value = {"correlated": correlated, "following": following, "total": n_f}
    payload = {"following": following, "followers": n_f, "leaders": n_l, "window_hours": p["window"],
               "rate": rate, "baseline": p_cov, "lift": lift, "pearson_r": r, "correlated": correlated}
    return HandlerResult(text, value, payload)


# -- failure similarity ------------------------------------------------------


def _extract_similarity(question: str, ctx: Context) -> Dict[str, Any]:
    k = top_n(question) or int(ctx.setting("similarity_k"))
    fms = ctx.resolver.failure_mode_mentions(question)
    if fms:
        return {"mode": "failure_mode", "target": fms[0].node_id, "k": k}
    mentions = _mentions(question, ctx)
    if mentions:
        types = _types_outside(question, ctx, mentions)
        return {"mode": "equipment", "target": mentions[0].node_id, "k": k, "type": types[0] if types else None}
    raise ExtractionError("name a failure mode or equipment to compare against")


def _profile(ctx: Context, nid: str) -> Optional[np.ndarray]:
    vec = None
    for e, fm in ctx.graph.neighbors(nid, ["EXPERIENCED"], Direction.OUT):
        emb = fm.get("embedding")
        if not isinstance(emb, list):
            continue
        v = np.asarray(emb, dtype=np.float64) * float(e.properties.get("count", 1))
        vec = v if vec is None else vec + v
    if vec is None or not np.any(vec):
        return None
    return vec / np.linalg.norm(vec)


def _similarity(p: Dict[str, Any], ctx: Context) -> HandlerResult:
    k = p["k"]
    if p["mode"] == "failure_mode":
        if ctx.index is None or p["target"] not in ctx.index:
            raise ExtractionError("the failure-mode vector index is not available")
        target = ctx.node(p["target"])
        hits = [(key, d) for key, d in ctx.index.knn(ctx.index.vector(p["target"]), k + 1) if key != p["target"]][:k]
        ctx.trace.append(f"vector: HNSW knn k={k + 1} ef={max(ctx.index.ef_search, k + 1)} over {len(ctx.index)} failure modes")
        lines = [f"{i + 1}. {ctx.label(key)} (distance {d:.4f})" for i, (key, d) in enumerate(hits)]
        text = f"Failure modes most similar to {target.get('name')}:\n" + "\n".join(lines)
        value = [ctx.label(key) for key, _ in hits]
        payload = {"target": target.get("name"), "neighbors": [{"name": ctx.label(key), "distance": d} for key, d in hits]}
        return HandlerResult(text, value, payload)
    target = ctx.node(p["target"])
    tv = _profile(ctx, p["target"])
    if tv is None:
        return HandlerResult(f"{target.get('name')} has no recorded failures to compare.", [], {"target": target.get("name")})
    if p["type"]:
        pool = ctx.resolver.types.get(p["type"], [])
    else:
        pool = ctx.graph.nodes_by_label("Equipment")
    idx = HnswIndex(dim=tv.shape[0], M=8, ef_construction=64, seed=0)
    for nid in pool:
        if nid == p["target"]:
            continue
        v = _profile(ctx, nid)
        if v is not None:
            idx.insert(nid, v)
    if len(idx) == 0:
        return HandlerResult("No candidate equipment has recorded failures.", [], {"target": target.get("name")})
    hits = idx.knn(tv, min(k, len(idx)), ef=len(idx))
    ctx.trace.append(
        f"vector: failure-profile HNSW over {len(idx)} equipment (EXPERIENCED counts x failure-mode embeddings), knn k={k}"
    )
    scope = f" {p['type']} equipment" if p["type"] else " equipment"
    lines = [f"{i + 1}. {ctx.label(key)} (distance {d:.4f})" for i, (key, d) in enumerate(hits)]
    text = f"Most similar{scope} to {target.get('name')} by failure history:\n" + "\n".join(lines)
    value = [ctx.label(key) for key, _ in hits]
    payload = {"target": target.get("name"), "neighbors": [{"name": ctx.label(key), "distance": d} for key, d in hits]}
    return HandlerResult(text, value, payload)


# -- criticality -------------------------------------------------------------


def _extract_criticality(question: str, ctx: Context) -> Dict[str, Any]:
    n = top_n(question)
    if n is None and re.search(r"\bmost critical\b", question, re.I) and not re.search(r"\brank", question, re.I):
        n = 1
    types = ctx.resolver.type_mentions(question)
    return {"n": n, "type": types[0][0] if types else None}


def _criticality(p: Dict[str, Any], ctx: Context) -> HandlerResult:
    rk = analytics.criticality(ctx.graph)
    ctx.algorithm(
        f"PageRank damping={rk.damping} over {', '.join(rk.edge_types)}; "
        f"{rk.iterations} iterations, residual {rk.residual:.2e}"
    )
    ranking = rk.ranking
    if p["type"]:
        keep = set(ctx.resolver.types.get(p["type"], []))
        ranking = [(nid, s) for nid, s in ranking if nid in keep]
    if p["n"]:
        ranking = ranking[: p["n"]]
    lines = [f"{i + 1}. {ctx.label(nid)} ({s:.4f})" for i, (nid, s) in enumerate(ranking)]
    text = "Equipment ranked by criticality (PageRank):\n" + "\n".join(lines)
    value = [ctx.label(nid) for nid, _ in ranking]
    payload = {"ranking": [{"equipment": ctx.node(nid).get("equipment_id"), "name": ctx.label(nid), "score": s}
                           for nid, s in ranking]}
    return HandlerResult(text, value, payload)


# -- MTBF --------------------------------------------------------------------

_COMPONENT = re.compile(r"\b(?:'s\s+|of\s+(?:the\s+)?)?([a-z]+)[\s-]+(?:related\s+)?failures?\b|'s\s+([a-z]+)\b", re.I)
_NOT_COMPONENT = {"between", "time", "mean", "the", "all", "corrective", "of", "for", "any"}


def _extract_mtbf(question: str, ctx: Context) -> Dict[str, Any]:
    m = _equipment(question, ctx)
    comp = None
    for cm in _COMPONENT.finditer(question):
        word = (cm.group(1) or cm.group(2) or "").lower()
        if word and word not in _NOT_COMPONENT and word not in m.text.lower().split():
            comp = singular(word)
            break
    return {"equipment": m.node_id, "component": comp, "window": year_window(question)}


def _mtbf(p: Dict[str, Any], ctx: Context) -> HandlerResult:
    comp = p["component"]

    def keep(ev: Node) -> bool:
        if not analytics.is_failure_event(ev):
            return False
        if comp is None:
            return True
        hay = f"{ev.get('failure_mode', '')} {ev.get('description', '')}".lower()
        return comp in hay

    window = p["window"]
    win = None
    if window is not None:
        start, end = window
        # year windows are half-open; mtbf() takes an inclusive end
        win = (start, end - timedelta(microseconds=1) if end is not None else None)
    st = analytics.mtbf(ctx.graph, p["equipment"], keep, win)
    ctx.algorithm(f"MTBF over {st.count} corrective work orders")
    name = ctx.label(p["equipment"])
    what = f"{comp}-related failures" if comp else "failures"
    scope = _window_text(window)
    if st.mean_gap_hours is None:
        text = f"{name} has {st.count} {what}{scope}; MTBF needs at least two."
    else:
        text = f"MTBF for {name} ({what}{scope}): {_fmt_hours(st.mean_gap_hours)} across {st.count} failures."
    payload = {"equipment": ctx.node(p["equipment"]).get("equipment_id"), "component": comp, "failures": st.count,
               "mtbf_hours": st.mean_gap_hours, "failure_ids": [ctx.node(i).get("event_id") for i in st.failure_ids]}
    return HandlerResult(text, st.mean_gap_hours, payload)


# -- dependency traversal ----------------------------------------------------

_UPSTREAM = re.compile(r"\bdoes\s+.+\s+depend\s+on\b|\bupstream\b|\brel(?:y|ies)\s+on\b|\bdepends?\s+on\s+what\b", re.I)


def _extract_dependency(question: str, ctx: Context) -> Dict[str, Any]:
    m = _equipment(question, ctx)
    depth = None
    dm = re.search(r"\bwithin\s+(\d+)\s+hops?\b|\b(\d+)\s+hops?\b", question, re.I)
    if dm:
        depth = int(dm.group(1) or dm.group(2))
    elif re.search(r"\bdirect(?:ly)?\b|\bimmediate(?:ly)?\b", question, re.I):
        depth = 1
    return {
        "equipment": m.node_id,
        "upstream": bool(_UPSTREAM.search(question)),
        "depth": depth,
        "count": bool(re.search(r"\bhow many\b", question, re.I)),
    }


def _dependency(p: Dict[str, Any], ctx: Context) -> HandlerResult:
    fn = analytics.upstream if p["upstream"] else analytics.cascade
    rep = fn(ctx.graph, p["equipment"], max_depth=p["depth"])
    direction = "upstream" if p["upstream"] else "downstream cascade"
    ctx.algorithm(f"{direction} BFS over DEPENDS_ON from {ctx.node(p['equipment']).get('equipment_id')}"
                  + (f", depth <= {p['depth']}" if p["depth"] else ""))
    name = ctx.label(p["equipment"])
    items = [f"{ctx.label(nid)} ({h} hop{'s' if h > 1 else ''})" for nid, h in rep.affected]
    if p["upstream"]:
        head = f"{name} depends on {len(items)} equipment"
    else:
        head = f"If {name} fails, {len(items)} equipment are affected"
    text = head + (": " + ", ".join(items) + "." if items else ".")
    listing = [ctx.label(nid) for nid in rep.ids]
    payload = {"root": ctx.node(p["equipment"]).get("equipment_id"), "direction": "upstream" if p["upstream"] else "downstream",
               "affected": [{"equipment": ctx.node(nid).get("equipment_id"), "name": ctx.label(nid), "hops": h}
                            for nid, h in rep.affected]}
    return HandlerResult(text, len(listing) if p["count"] else listing, payload)


# -- failure-mode / sensor mapping ------------------------------------------


def _sensor_types(ctx: Context) -> List[str]:
    seen = set()
    for nid in ctx.graph.nodes_by_label("Sensor"):
        t = ctx.node(nid).get("type")
        if isinstance(t, str):
            seen.add(t.lower())
    return sorted(seen, key=lambda s: (-len(s), s))


def _extract_fmsr(question: str, ctx: Context) -> Dict[str, Any]:
    fms = ctx.resolver.failure_mode_mentions(question)
    eq = _equipment(question, ctx, required=False)
    if fms:
        return {"mode": "sensors", "failure_mode": fms[0].node_id, "equipment": eq.node_id if eq else None}
    low = question.lower()
    for st in _sensor_types(ctx):
        if re.search(r"(?<![\w-])" + re.escape(st) + r"(?![\w-])", low):
            return {"mode": "failure_modes", "sensor_type": st, "equipment": eq.node_id if eq else None}
    raise ExtractionError("name a failure mode or a sensor type")


def _fmsr(p: Dict[str, Any], ctx: Context) -> HandlerResult:
    if p["mode"] == "sensors":
        fm = ctx.node(p["failure_mode"])
        t = ctx.query(
            f"MATCH (s:Sensor)-[:MONITORS]->(fm:FailureMode {{name: {_q(str(fm.get('name')))}}}) "
            "RETURN s.sensor_id, s.type, s.equipment_id ORDER BY s.sensor_id"
        )
        rows = t.rows
        if p["equipment"]:
            eid = ctx.node(p["equipment"]).get("equipment_id")
            rows = [r for r in rows if r[2] == eid]
            value = [r[0] for r in rows]
            text = f"{len(value)} sensors on {ctx.label(p['equipment'])} monitor {fm.get('name')}: " + ", ".join(
                f"{r[0]} ({r[1]})" for r in rows)
        else:
            value = sorted({str(r[1]) for r in rows})
            text = f"{fm.get('name')} is detected by {', '.join(value) or 'no'} sensors ({len(rows)} installed sensors)."
        return HandlerResult(text, value, {"failure_mode": fm.get("name"), "sensors": [list(r) for r in rows]})
    st = p["sensor_type"]
    t = ctx.query(
        f"MATCH (s:Sensor)-[:MONITORS]->(fm:FailureMode) WHERE toLower(s.type) = {_q(st)} "
        "RETURN DISTINCT fm.name ORDER BY fm.name"
    )
    value = [r[0] for r in t.rows]
    text = f"{st.capitalize()} sensors can detect {len(value)} failure modes: " + (", ".join(value) or "none") + "."
    return HandlerResult(text, value, {"sensor_type": st, "failure_modes": value})


# -- event counts ------------------------------------------------------------


def _extract_count(question: str, ctx: Context) -> Dict[str, Any]:
    low = question.lower()
    kind, wo_type = None, None
    if re.search(r"\banomal", low):
        kind = "anomaly"
    elif re.search(r"\balerts?\b|\balarms?\b", low):
        kind = "alert"
    elif re.search(r"\bfailures?\b|\bcorrective\b|\bbreakdowns?\b", low):
        kind, wo_type = "work_order", "corrective"
    elif re.search(r"\bpreventive\b", low):
        kind, wo_type = "work_order", "preventive"
    elif re.search(r"\bwork orders?\b", low):
        kind = "work_order"
    mentions = _mentions(question, ctx)
    types = _types_outside(question, ctx, mentions)
    if not mentions and not types and not re.search(r"\b(?:all|total|overall|whole|entire)\b", low):
        raise ExtractionError("no equipment or equipment type in the question")
    return {"equipment": mentions[0].node_id if mentions else None, "type": None if mentions else (types[0] if types else None),
            "kind": kind, "wo_type": wo_type, "window": year_window(question)}


def _count(p: Dict[str, Any], ctx: Context) -> HandlerResult:
    conds = []
    if p["kind"]:
        conds.append(f"e.kind = {_q(p['kind'])}")
    if p["wo_type"]:
        conds.append(f"e.wo_type = {_q(p['wo_type'])}")
    if p["window"]:
        start, end = p["window"]
        if start is not None:
            conds.append(f"e.timestamp >= {_q(_ts(start))}")
        if end is not None:
            conds.append(f"e.timestamp < {_q(_ts(end))}")
    if p["equipment"]:
        conds.insert(0, f"e.equipment_id = {_q(str(ctx.node(p['equipment']).get('equipment_id')))}")
        text = "MATCH (e:Event)"
        scope = ctx.label(p["equipment"])
    elif p["type"]:
        text = f"MATCH (e:Event)-[:FOR_EQUIPMENT]->(q:Equipment {{equipment_type: {_q(p['type'])}}})"
        scope = f"all {p['type']} equipment"
    else:
        text = "MATCH (e:Event)"
        scope = "all equipment"
    if conds:
        text += " WHERE " + " AND ".join(conds)
    table = ctx.query(text + " RETURN count(e) AS events")
    n = table.scalar()
    what = {"anomaly": "anomalies", "alert": "alerts"}.get(p["kind"] or "", "work orders" if p["kind"] else "events")
    if p["wo_type"]:
        what = f"{p['wo_type']} work orders"
    return HandlerResult(f"{scope} has {n} {what}{_window_text(p['window'])}.", n,
                         {"count": n, "scope": scope, "kind": p["kind"], "wo_type": p["wo_type"],
                          "table": {"columns": table.columns, "rows": [list(r) for r in table.rows]}})


# -- work orders -------------------------------------------------------------


def _extract_work_order(question: str, ctx: Context) -> Dict[str, Any]:
    m = _WO_ID.search(question)
    if m:
        return {"mode": "lookup", "id": m.group(0).upper()}
    low = question.lower()
    eq = [x.node_id for x in _mentions(question, ctx)]
    days = hours_phrase(question)
    if re.search(r"\bbundl|\bgroup|\bbatch|\bcombine", low):
        return {"mode": "bundle", "equipment": eq, "window": year_window(question),
                "days": (days / 24.0) if days else float(ctx.setting("bundle_window_days"))}
    if re.search(r"\bopen\b|\bpending\b|\boutstanding\b|\bbacklog\b", low):
        return {"mode": "open", "equipment": eq}
    if not eq:
        raise ExtractionError("name a work order id or equipment")
    return {"mode": "list", "equipment": eq, "window": year_window(question)}


def _work_order(p: Dict[str, Any], ctx: Context) -> HandlerResult:
    mode = p["mode"]
    if mode == "lookup":
        t = ctx.query(f"MATCH (w:Event {{event_id: {_q(p['id'])}}})-[:FOR_EQUIPMENT]->(q:Equipment) RETURN w, q")
        if not t.rows:
            return HandlerResult(f"No work order {p['id']} exists in the graph.", None, {"work_order": p["id"]})
        w, q = t.rows[0]
        value = {"event_id": w.get("event_id"), "equipment": q.get("name"), "wo_type": w.get("wo_type"),
                 "failure_mode": w.get("failure_mode"), "timestamp": _ts(w.get("timestamp"))}
        fm = f", failure mode {w.get('failure_mode')}" if w.get("failure_mode") else ""
        text = (f"{w.get('event_id')}: {w.get('wo_type')} work order on {q.get('name')} at {_ts(w.get('timestamp'))}"
                f"{fm}; status {w.get('status')}, cost {w.get('cost')}, {w.get('duration_hours')} h. {w.get('description', '')}")
        return HandlerResult(text.strip(), value, dict(value, status=w.get("status"), cost=w.get("cost"),
                                                       duration_hours=w.get("duration_hours")))
    eq_ids = [str(ctx.node(n).get("equipment_id")) for n in p.get("equipment", [])]
    if mode == "open":
        rows = _open_work_orders(ctx, eq_ids)
        ids = sorted(str(e.get("event_id")) for e in rows)
        lines = [f"- {e.get('event_id')} {e.get('equipment_id')} due {_fmt(e.get('due'))} ({e.get('duration_hours')} h, cost {e.get('cost')})"
                 for e in rows]
        details = [{"event_id": e.get("event_id"), "equipment_id": e.get("equipment_id"), "due": _fmt(e.get("due")),
                    "duration_hours": e.get("duration_hours"), "cost": e.get("cost")} for e in rows]
        return HandlerResult(f"{len(ids)} open work orders:\n" + "\n".join(lines), ids, {"open": details})
    wos: List[Node] = []
    scope = p["equipment"] or ctx.graph.nodes_by_label("Equipment")
    window = p.get("window")
    for nid in scope:
        for ev in _events(ctx, nid):
            if ev.get("kind") != "work_order":
                continue
            ts = ev.get("timestamp")
            if window and ((window[0] and ts < window[0]) or (window[1] and ts >= window[1])):
                continue
            wos.append(ev)
    if mode == "bundle":
        if not window:
            open_only = [e for e in wos if e.get("status") == "open"]
            wos = open_only or wos
        return _bundle(wos, p["days"], ctx)
    wos.sort(key=lambda e: (e.get("timestamp"), e.seq))
    ids = [str(e.get("event_id")) for e in wos]
    shown = "\n".join(f"- {e.get('event_id')} {_ts(e.get('timestamp'))} {e.get('wo_type')}: {e.get('description', '')}"
                      for e in wos[:20])
    more = f"\n(showing 20 of {len(ids)})" if len(ids) > 20 else ""
    who = ", ".join(ctx.label(n) for n in p["equipment"])
    return HandlerResult(f"{who} has {len(ids)} work orders{_window_text(window)}:\n{shown}{more}", ids, {"work_orders": ids})


def _bundle(wos: List[Node], days: float, ctx: Context) -> HandlerResult:
    """Greedy per-equipment grouping: a bundle spans at most ``days`` from its first order."""
    span = timedelta(days=days)
    by_eq: Dict[str, List[Node]] = {}
    for e in sorted(wos, key=lambda e: (e.get("timestamp"), e.seq)):
        by_eq.setdefault(str(e.get("equipment_id")), []).append(e)
    bundles: List[List[str]] = []
    for eq in sorted(by_eq):
        cur: List[Node] = []
        for e in by_eq[eq]:
            if cur and e.get("timestamp") - cur[0].get("timestamp") > span:
                if len(cur) > 1:
                    bundles.append([str(x.get("event_id")) for x in cur])
                cur = []
            cur.append(e)
        if len(cur) > 1:
            bundles.append([str(x.get("event_id")) for x in cur])
    ctx.algorithm(f"bundling: same equipment, {days:g}-day window, {len(wos)} work orders")
    if not bundles:
        return HandlerResult(f"No work orders can be bundled within {days:g} days.", [],
                             {"bundles": [], "window_days": days})
    lines = [f"- {', '.join(b)}" for b in bundles]
    return HandlerResult(f"{len(bundles)} bundles of work orders on the same equipment within {days:g} days:\n"
                         + "\n".join(lines), bundles, {"bundles": bundles, "window_days": days})


# -- equipment profile -------------------------------------------------------


def _extract_profile(question: str, ctx: Context) -> Dict[str, Any]:
    return {"equipment": _equipment(question, ctx).node_id}


def _profile_answer(p: Dict[str, Any], ctx: Context) -> HandlerResult:
    nid = p["equipment"]
    n = ctx.node(nid)
    evs = _events(ctx, nid)
    kinds: Dict[str, int] = {}
    corrective = preventive = 0
    for e in evs:
        kinds[str(e.get("kind"))] = kinds.get(str(e.get("kind")), 0) + 1
        if e.get("kind") == "work_order":
            corrective += e.get("wo_type") == "corrective"
            preventive += e.get("wo_type") == "preventive"
    fms = sorted(((int(e.properties.get("count", 1)), fm.get("name")) for e, fm in
                  ctx.graph.neighbors(nid, ["EXPERIENCED"], Direction.OUT)), key=lambda t: (-t[0], t[1]))
    st = analytics.mtbf(ctx.graph, nid)
    ctx.algorithm("MTBF over corrective work orders")
    sensors = len(ctx.graph.neighbors(nid, ["HAS_SENSOR"], Direction.OUT))
    top = fms[0][1] if fms else None
    lines = [
        f"{n.get('name')} ({n.get('equipment_id')}, {n.get('equipment_type')}, {n.get('iso14224_class', '')}).",
        f"Events: {len(evs)} ({', '.join(f'{k} {v}' for k, v in sorted(kinds.items()))}).",
        f"Work orders: {corrective} corrective, {preventive} preventive. Sensors: {sensors}.",
    ]
    if fms:
        lines.append("Failure modes: " + ", ".join(f"{name} ({c})" for c, name in fms) + ".")
    if st.mean_gap_hours is not None:
        lines.append(f"MTBF: {_fmt_hours(st.mean_gap_hours)}.")
    value = {"corrective": corrective, "preventive": preventive, "top_failure_mode": top}
    payload = dict(value, events=len(evs), kinds=kinds, sensors=sensors, mtbf_hours=st.mean_gap_hours,
                   failure_modes=[{"name": name, "count": c} for c, name in fms])
    return HandlerResult("\n".join(lines), value, payload)


# -- failure modes of equipment / type ----------------------------------------


def _extract_failure_modes(question: str, ctx: Context) -> Dict[str, Any]:
    m = _equipment(question, ctx, required=False)
    key = extract_equipment_type(question)
    # a bare type name that also happens to be an equipment name reads as the type
    if m and not (key and canonicalize(m.text) == key and ctx.resolver.types.get(key)):
        return {"equipment": [m.node_id], "label": m.text, "type": None}
    if key is None:
        raise ExtractionError("no equipment or equipment type in the question")
    eq = ctx.resolver.types.get(key, [])
    if eq:
        return {"equipment": eq, "label": key, "type": key}
    fms = [nid for nid in ctx.graph.nodes_by_label("FailureMode")
           if f" {key} " in f" {canonicalize(str(ctx.node(nid).get('name', '')))} "]
    if fms:
        return {"equipment": [], "failure_modes": fms, "label": key, "type": key}
    raise ExtractionError(f"no {key} equipment in the graph")


def _failure_modes(p: Dict[str, Any], ctx: Context) -> HandlerResult:
    if not p["equipment"]:
        names_ = sorted(ctx.label(n) for n in p["failure_modes"])
        return HandlerResult(f"Failure modes involving {p['label']}: " + ", ".join(names_) + ".", names_,
                             {"failure_modes": names_})
    counts: Dict[str, int] = {}
    for nid in p["equipment"]:
        for e, fm in ctx.graph.neighbors(nid, ["EXPERIENCED"], Direction.OUT):
            counts[str(fm.get("name"))] = counts.get(str(fm.get("name")), 0) + int(e.properties.get("count", 1))
    ranked = sorted(counts.items(), key=lambda t: (-t[1], t[0]))
    ctx.trace.append(f"traverse: EXPERIENCED from {len(p['equipment'])} equipment")
    who = ", ".join(ctx.label(n) for n in p["equipment"]) if p["type"] is None else f"{p['type']} equipment"
    if not ranked:
        return HandlerResult(f"No failure modes are recorded for {who}.", [], {"failure_modes": []})
    text = f"Failure modes of {who}: " + ", ".join(f"{n} ({c})" for n, c in ranked) + "."
    value = [n for n, _ in ranked]
    return HandlerResult(text, value, {"failure_modes": [{"name": n, "count": c} for n, c in ranked]})


# -- IoT status --------------------------------------------------------------


def _extract_iot(question: str, ctx: Context) -> Dict[str, Any]:
    return {"equipment": _equipment(question, ctx).node_id}


def _iot(p: Dict[str, Any], ctx: Context) -> HandlerResult:
    eid = ctx.node(p["equipment"]).get("equipment_id")
    t = ctx.query(
        f"MATCH (q:Equipment {{equipment_id: {_q(str(eid))}}})-[:HAS_SENSOR]->(s:Sensor) "
        "RETURN s ORDER BY s.sensor_id"
    )
    sensors = [r[0] for r in t.rows]
    lines = []
    listing = []
    for s in sensors:
        reads = [rd for _, rd in ctx.graph.neighbors(s.id, ["PRODUCED_READING"], Direction.OUT)]
        last = max(reads, key=lambda r: (r.get("timestamp"), r.seq)) if reads else None
        rng = f"range {s.get('min')}..{s.get('max')} {s.get('unit', '')}".rstrip()
        latest = f", latest {last.get('value')} at {_ts(last.get('timestamp'))}" if last is not None else ""
        lines.append(f"- {s.get('sensor_id')} {s.get('name')} ({s.get('type')}, {rng}){latest}")
        listing.append({"sensor_id": s.get("sensor_id"), "name": s.get("name"), "type": s.get("type"),
                        "unit": s.get("unit"), "min": s.get("min"), "max": s.get("max"),
                        "latest": last.get("value") if last is not None else None})
    text = f"{ctx.label(p['equipment'])} has {len(sensors)} sensors:\n" + "\n".join(lines)
    return HandlerResult(text, [str(s.get("sensor_id")) for s in sensors], {"sensors": listing})


# -- catalog -----------------------------------------------------------------


def handler_catalog() -> List[HandlerSpec]:
    """Handlers in priority order: the first whose trigger matches wins."""
    return [
        HandlerSpec("root_cause", "root_cause",
                    (r"\broot cause\b", r"\bwhat (?:led|lead) to\b", r"\btrace\b.*\bWO-\d{4}", r"\bwhy did\b.*\bWO-\d{4}",
                     r"\bcaused?\b.*\bWO-\d{4}", r"\bprecede[ds]?\b.*\bWO-\d{4}", r"\bleading to\b"),
                    _extract_root_cause, _root_cause),
        HandlerSpec("maintenance_optimization", "maintenance_optimization",
                    (r"\bschedul", r"\boptimi[sz]e\b.*\bmaintenance\b", r"\bpareto\b", r"\bminimi[sz]e\b.*\bdowntime\b"),
                    _extract_schedule, _schedule),
        HandlerSpec("rule_logic", "rule_logic",
                    (r"\bmonitoring rules?\b", r"\brules?\b.*\b(?:violat|trigger|fire|breach)", r"\bthreshold\b.*\b(?:violat|exceed|breach)",
                     r"\b(?:violat|exceed|breach)\w*\b.*\b(?:rules?|thresholds?)\b"),
                    _extract_rules, _rules),
        HandlerSpec("cross_asset_correlation", "cross_asset_correlation",
                    (r"\bcorrelat", r"\btend to follow\b", r"\busually follow\b"),
                    _extract_correlation, _correlation),
        HandlerSpec("failure_similarity", "failure_similarity",
                    (r"\bsimilar\b", r"\bresembl", r"\blike\b.*\bfailure", r"\bcomparable\b"),
                    _extract_similarity, _similarity),
        HandlerSpec("criticality", "criticality",
                    (r"\bcritical(?:ity)?\b", r"\bmost important equipment\b", r"\bpagerank\b"),
                    _extract_criticality, _criticality),
        HandlerSpec("temporal_mtbf", "temporal",
                    (r"\bmtbf\b", r"\bmean time between\b", r"\baverage time between\b", r"\bhow often\b.*\bfail"),
                    _extract_mtbf, _mtbf),
        HandlerSpec("multi_hop_dependency", "multi_hop_dependency",
                    (r"\bif\b.+\bfails?\b", r"\baffected\b", r"\bdownstream\b", r"\bupstream\b", r"\bdepend", r"\bcascad",
                     r"\bimpact(?:ed)?\b.*\bfail", r"\brel(?:y|ies) on\b"),
                    _extract_dependency, _dependency),
        HandlerSpec("fmsr_mapping", "fmsr",
                    (r"\bsensors?\b.*\b(?:detect|monitor|indicate)", r"\b(?:detect|monitor|indicate)\w*\b.*\bsensors?\b",
                     r"\bwhich failure modes?\b.*\bsensors?\b"),
                    _extract_fmsr, _fmsr),
        HandlerSpec("event_count", "event_count",
                    (r"\bhow many\b.*\b(?:events?|alerts?|alarms?|anomal\w*|work orders?|failures?|breakdowns?)\b",
                     r"\bnumber of\b.*\b(?:events?|alerts?|anomal\w*|work orders?|failures?)\b", r"\bcount\b.*\bevents?\b"),
                    _extract_count, _count),
        HandlerSpec("work_order", "work_order",
                    (r"\bwork orders?\b", r"\bWO-\d{4}-\d{4}\b", r"\bbundl"),
                    _extract_work_order, _work_order,
                    excludes=(r"\broot cause\b", r"\btrace\b", r"\b(?:led|lead|leading) to\b", r"\bpreced",
                              r"\bschedul", r"\bcaused?\b")),
        HandlerSpec("phm_profile", "phm",
                    (r"\bprofile\b", r"\bhealth\b", r"\bsummar(?:y|ize|ise)\b", r"\bfailure history\b", r"\boverview\b"),
                    _extract_profile, _profile_answer),
        HandlerSpec("equipment_failure_modes", "failure_modes",
                    (r"\bfailure modes?\b", r"\bhow (?:can|does|do)\b.*\bfail\b", r"\bways?\b.*\bfail\b"),
                    _extract_failure_modes, _failure_modes,
                    excludes=(r"\bsimilar\b", r"\bresembl", r"\bsensors?\b", r"\bcritical")),
        HandlerSpec("iot_status", "iot",
                    (r"\bsensors?\b", r"\breadings?\b", r"\btelemetry\b", r"\bmeasur"),
                    _extract_iot, _iot),
    ]
