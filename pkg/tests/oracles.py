"""Independent reference computations over the raw fixture source files.

Nothing here touches the graph store, the Cypher engine or the router: the
oracles read the CSV/YAML/JSON files with the standard library and compute
answers with plain Python, networkx and numpy brute force.
"""

from __future__ import annotations

import csv
import json
import math
from collections import deque
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
import yaml


def parse_ts(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


@dataclass
class RawFixture:
    equipment: List[Dict[str, str]]
    events: List[Dict[str, str]]
    topology: List[Dict[str, str]]
    fmsr: List[Dict]
    sensors: List[Dict]

    @classmethod
    def read(cls, directory: Path) -> "RawFixture":
        d = Path(directory)
        with open(d / "hierarchy.csv", newline="") as f:
            eq = [r for r in csv.DictReader(f) if r["kind"] == "equipment"]
        with open(d / "events.csv", newline="") as f:
            events = list(csv.DictReader(f))
        topo = yaml.safe_load((d / "topology.yaml").read_text())
        fmsr = yaml.safe_load((d / "fmsr.yaml").read_text())
        sensors = json.loads((d / "sensors.json").read_text())
        return cls(eq, events, topo, fmsr, sensors)

    # -- lookups ----------------------------------------------------------

    def name(self, eq_id: str) -> str:
        return next(r["name"] for r in self.equipment if r["id"] == eq_id)

    def ids_of_type(self, equipment_type: str) -> List[str]:
        return [r["id"] for r in self.equipment if r["equipment_type"] == equipment_type]

    def events_for(self, eq_ids: Sequence[str]) -> List[Dict[str, str]]:
        wanted = set(eq_ids)
        return [e for e in self.events if e["equipment_id"] in wanted]


# -- dependency reachability -------------------------------------------------


def _reach(edges: List[Tuple[str, str]], root: str, depth: Optional[int]) -> Set[str]:
    adj: Dict[str, List[str]] = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
    seen = {root: 0}
    q = deque([root])
    while q:
        cur = q.popleft()
        if depth is not None and seen[cur] >= depth:
            continue
        for nxt in adj.get(cur, []):
            if nxt not in seen:
                seen[nxt] = seen[cur] + 1
                q.append(nxt)
    seen.pop(root)
    return set(seen)


def depends_edges(fx: RawFixture) -> List[Tuple[str, str]]:
    return [(t["from"], t["to"]) for t in fx.topology if t["rel"] == "DEPENDS_ON"]


def affected_by_failure(fx: RawFixture, root: str, depth: Optional[int] = None) -> Set[str]:
    """Reversed reachability: X depends on Y means Y's failure reaches X."""
    return _reach([(b, a) for a, b in depends_edges(fx)], root, depth)


def depends_on(fx: RawFixture, root: str) -> Set[str]:
    return _reach(depends_edges(fx), root, None)


# -- criticality -------------------------------------------------------------


def criticality_ranking(fx: RawFixture, damping: float = 0.85) -> List[Tuple[str, float]]:
    import networkx as nx

    # parallel relations (depends-on plus shared system) count twice, as in the engine
    g = nx.MultiDiGraph()
    order = [r["id"] for r in fx.equipment]
    g.add_nodes_from(order)
    for t in fx.topology:
        if t["rel"] == "DEPENDS_ON":
            g.add_edge(t["from"], t["to"])
        elif t["rel"] == "SHARES_SYSTEM_WITH":
            g.add_edge(t["from"], t["to"])
            g.add_edge(t["to"], t["from"])
    pr = nx.pagerank(g, alpha=damping, tol=1e-14, max_iter=100000)
    pos = {k: i for i, k in enumerate(order)}
    return sorted(pr.items(), key=lambda kv: (-round(kv[1], 9), pos[kv[0]]))


# -- MTBF --------------------------------------------------------------------


def mtbf_hours(
    fx: RawFixture,
    eq_id: str,
    component: Optional[str] = None,
    years: Optional[Tuple[int, int]] = None,
) -> Optional[float]:
    times = []
    for e in fx.events_for([eq_id]):
        if e["kind"] != "work_order" or e["wo_type"] != "corrective":
            continue
        if component and component not in (e["failure_mode"] + " " + e["description"]).lower():
            continue
        t = parse_ts(e["timestamp"])
        if years and not years[0] <= t.year <= years[1]:
            continue
        times.append(t)
    times.sort()
    if len(times) < 2:
        return None
    gaps = [(b - a).total_seconds() / 3600.0 for a, b in zip(times, times[1:])]
    return math.fsum(gaps) / len(gaps)


# -- root cause --------------------------------------------------------------


def preceding_events(fx: RawFixture, wo_id: str, lookback_hours: float) -> List[str]:
    target = next(e for e in fx.events if e["event_id"] == wo_id)
    t = parse_ts(target["timestamp"])
    scope = {target["equipment_id"]} | depends_on(fx, target["equipment_id"])
    start = t - timedelta(hours=lookback_hours)
    hits = [e for e in fx.events_for(sorted(scope)) if start <= parse_ts(e["timestamp"]) < t and e["event_id"] != wo_id]
    return [e["event_id"] for e in sorted(hits, key=lambda e: e["timestamp"])]


# -- similarity --------------------------------------------------------------


def failure_mode_vectors(fx: RawFixture, embed: Callable[[str], np.ndarray]) -> Dict[str, np.ndarray]:
    out = {}
    for fm in fx.fmsr:
        text = f"{fm['name']}. {fm.get('description') or ''}".strip()
        v = np.asarray(embed(text), dtype=np.float64)
        out[fm["name"]] = v / np.linalg.norm(v)
    return out


def similar_failure_modes(fx: RawFixture, embed, name: str, k: int) -> List[str]:
    vecs = failure_mode_vectors(fx, embed)
    q = vecs[name]
    scored = sorted((1.0 - float(v @ q), n) for n, v in vecs.items() if n != name)
    return [n for _, n in scored[:k]]


def failure_profiles(fx: RawFixture, embed) -> Dict[str, np.ndarray]:
    vecs = failure_mode_vectors(fx, embed)
    counts: Dict[str, Dict[str, int]] = {}
    for e in fx.events:
        if e["kind"] == "work_order" and e["wo_type"] == "corrective" and e["failure_mode"]:
            c = counts.setdefault(e["equipment_id"], {})
            c[e["failure_mode"]] = c.get(e["failure_mode"], 0) + 1
    out = {}
    for eq, c in counts.items():
        v = sum(n * vecs[fm] for fm, n in c.items())
        out[eq] = v / np.linalg.norm(v)
    return out


def similar_equipment(fx: RawFixture, embed, target: str, k: int, pool: Optional[Sequence[str]] = None) -> List[str]:
    prof = failure_profiles(fx, embed)
    q = prof[target]
    cands = [e for e in (pool or [r["id"] for r in fx.equipment]) if e != target and e in prof]
    scored = sorted((1.0 - float(prof[e] @ q), e) for e in cands)
    return [fx.name(e) for _, e in scored[:k]]


# -- temporal correlation ----------------------------------------------------


def correlation(
    fx: RawFixture,
    follower: Callable[[Dict[str, str]], bool],
    leader: Callable[[Dict[str, str]], bool],
    window_hours: float,
) -> Dict[str, object]:
    """Followers strictly after a leader within the window, lift over minute-grid coverage."""
    fol = sorted(parse_ts(e["timestamp"]) for e in fx.events if follower(e))
    lead = sorted(parse_ts(e["timestamp"]) for e in fx.events if leader(e))
    w = timedelta(hours=window_hours)
    following = sum(1 for t in fol if any(timedelta(0) < t - l <= w for l in lead))
    if not fol or not lead:
        return {"correlated": False, "following": following, "total": len(fol)}
    t0 = min(fol[0], lead[0])
    t1 = max(fol[-1], lead[-1])
    minutes = int((t1 - t0).total_seconds() // 60)
    grid = np.zeros(minutes + 1, dtype=bool)
    wm = int(window_hours * 60)
    for l in lead:
        s = int((l - t0).total_seconds() // 60)
        grid[s: s + wm] = True
    p = grid[:minutes].mean() if minutes else 1.0
    lift = (following / len(fol)) / p if p > 0 else 0.0
    return {"correlated": bool(lift >= 2.0 and following >= 5), "following": following, "total": len(fol)}


def is_type(fx: RawFixture, equipment_type: str) -> Callable[[Dict[str, str]], bool]:
    ids = set(fx.ids_of_type(equipment_type))
    return lambda e: e["equipment_id"] in ids


def event_filter(
    eq_ids: Optional[Set[str]] = None,
    kind: Optional[str] = None,
    contains: Optional[str] = None,
    corrective: bool = False,
) -> Callable[[Dict[str, str]], bool]:
    def keep(e: Dict[str, str]) -> bool:
        if eq_ids is not None and e["equipment_id"] not in eq_ids:
            return False
        if corrective and not (e["kind"] == "work_order" and e["wo_type"] == "corrective"):
            return False
        if kind is not None and e["kind"] != kind:
            return False
        if contains is not None and contains not in e["description"].lower():
            return False
        return True

    return keep
