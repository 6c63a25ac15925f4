"""Greedy pattern planner.

A plan is a list of binding steps (scan, seek, expand) with WHERE
conjuncts attached to the first step at which all their variables are
bound. Start points are chosen by estimated cardinality: a property-index
seek when a labelled node carries an equality on a literal, else the
smallest label scan.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from ..graph.store import GraphStore
from . import ast as A
from . import render
from .validate import split_conjuncts


@dataclass
class NodeVar:
    name: str
    order: int
    labels: List[str] = field(default_factory=list)
    props: List[Tuple[str, Any]] = field(default_factory=list)


@dataclass
class RelVar:
    name: str
    order: int
    types: Tuple[str, ...]
    props: List[Tuple[str, Any]]
    left: str
    right: str
    direction: str
    clause: int


@dataclass
class Step:
    kind: str  # AllNodesScan LabelScan IndexSeek Expand ExpandInto
    var: str
    label: Optional[str] = None
    key: Optional[str] = None
    value: Any = None
    rel: Optional[RelVar] = None
    source: Optional[str] = None
    filters: List[A.Expr] = field(default_factory=list)

    def describe(self) -> str:
        if self.kind == "AllNodesScan":
            text = f"AllNodesScan({self.var})"
        elif self.kind == "LabelScan":
            text = f"LabelScan({self.var}:{self.label})"
        elif self.kind == "IndexSeek":
            text = f"IndexSeek({self.var}:{self.label} {self.key}={self.value!r})"
        else:
            r = self.rel
            types = "|".join(r.types) if r.types else "*"
            text = f"{self.kind}({self.source})-[{r.name}:{types}]-({self.var})"
        if self.filters:
            text += " filter " + " AND ".join(render.expr(f) for f in self.filters)
        return text


@dataclass
class Plan:
    steps: List[Step]
    nodes: Dict[str, NodeVar]
    rels: List[RelVar]
    tail: List[str] = field(default_factory=list)
    pre_filters: List[A.Expr] = field(default_factory=list)

    @property
    def var_order(self) -> List[str]:
        names = sorted(self.nodes.values(), key=lambda v: v.order)
        return [v.name for v in names] + [r.name for r in sorted(self.rels, key=lambda r: r.order)]

    def describe(self) -> List[str]:
        lines = [f"Filter({render.expr(f)})" for f in self.pre_filters]
        return lines + [s.describe() for s in self.steps] + list(self.tail)

    @property
    def uses_index(self) -> bool:
        return any(s.kind == "IndexSeek" for s in self.steps)

    def __str__(self) -> str:
        return "\n".join(self.describe())


def _literal_value(e):
    if isinstance(e, A.Literal):
        return e.value
    if isinstance(e, A.ListLiteral):
        return [i.value for i in e.items]
    raise TypeError("pattern properties must be literals")


def collect_pattern(q: A.MatchQuery) -> Tuple[Dict[str, NodeVar], List[RelVar]]:
    nodes: Dict[str, NodeVar] = {}
    rels: List[RelVar] = []
    anon = 0
    counter = 0

    def node_name(p: A.NodePattern) -> str:
        nonlocal anon, counter
        if p.var is None:
            name = f"#n{anon}"
            anon += 1
        else:
            name = p.var
        if name not in nodes:
            nodes[name] = NodeVar(name, counter)
            counter += 1
        v = nodes[name]
        for label in p.labels:
            if label not in v.labels:
                v.labels.append(label)
        v.props.extend((k, _literal_value(e)) for k, e in p.props)
        return name

    ranon = 0
    for ci, clause in enumerate(q.matches):
        for path in clause:
            names = [node_name(n) for n in path.nodes]
            for i, r in enumerate(path.rels):
                if r.var is None:
                    rname = f"#r{ranon}"
                    ranon += 1
                else:
                    rname = r.var
                rels.append(
                    RelVar(
                        rname,
                        len(rels),
                        r.types,
                        [(k, _literal_value(e)) for k, e in r.props],
                        names[i],
                        names[i + 1],
                        r.direction,
                        ci,
                    )
                )
    return nodes, rels


def _seek_candidates(var: NodeVar, conjuncts: List[A.Expr]) -> List[Tuple[str, Any]]:
    out = [(k, v) for k, v in var.props if not isinstance(v, list) and v is not None]
    for c in conjuncts:
        if not (isinstance(c, A.Compare) and c.op == "="):
            continue
        for prop, lit in ((c.left, c.right), (c.right, c.left)):
            if (
                isinstance(prop, A.Property)
                and prop.subject.name == var.name
                and isinstance(lit, A.Literal)
                and lit.value is not None
            ):
                out.append((prop.key, lit.value))
    return out


def _start_step(var: NodeVar, graph: GraphStore, conjuncts, use_indexes: bool) -> Tuple[int, Step]:
    best: Optional[Tuple[int, Step]] = None
    if use_indexes and var.labels:
        for key, value in _seek_candidates(var, conjuncts):
            for label in var.labels:
                cost = graph.property_bucket_size(label, key, value)
                if isinstance(value, str):
                    cost += _timestamp_bucket(graph, label, key, value)
                cand = (cost, Step("IndexSeek", var.name, label=label, key=key, value=value))
                if best is None or cand[0] < best[0]:
                    best = cand
    if best is not None:
        return best
    if var.labels:
        label = min(var.labels, key=lambda lb: (graph.label_count(lb), var.labels.index(lb)))
        return graph.label_count(label), Step("LabelScan", var.name, label=label)
    return graph.node_count, Step("AllNodesScan", var.name)


def _timestamp_bucket(graph: GraphStore, label: str, key: str, value: str) -> int:
    from ..graph.values import parse_timestamp

    try:
        ts = parse_timestamp(value)
    except ValueError:
        return 0
    return graph.property_bucket_size(label, key, ts)


def plan(
    q: A.MatchQuery,
    graph: GraphStore,
    use_indexes: bool = True,
    force_start: Optional[str] = None,
) -> Plan:
    nodes, rels = collect_pattern(q)
    conjuncts = split_conjuncts(q.where) if q.where is not None else []
    bound: List[str] = []
    steps: List[Step] = []
    remaining = list(rels)
    costs = {
        name: _start_step(v, graph, conjuncts, use_indexes) for name, v in nodes.items()
    }

    while len(bound) < len(nodes) or remaining:
        into = [r for r in remaining if r.left in bound and r.right in bound]
        if into:
            r = into[0]
            remaining.remove(r)
            steps.append(Step("ExpandInto", r.right, rel=r, source=r.left))
            continue
        connected = [r for r in remaining if r.left in bound or r.right in bound]
        if connected:
            def target(r: RelVar) -> str:
                return r.right if r.left in bound else r.left

            r = min(connected, key=lambda r: (costs[target(r)][0], r.order))
            remaining.remove(r)
            dst = target(r)
            steps.append(Step("Expand", dst, rel=r, source=r.left if dst == r.right else r.right))
            bound.append(dst)
            continue
        unbound = [v for v in nodes.values() if v.name not in bound]
        if force_start is not None and not bound and force_start in nodes:
            start = nodes[force_start]
        else:
            start = min(unbound, key=lambda v: (costs[v.name][0], v.order))
        steps.append(costs[start.name][1])
        bound.append(start.name)

    # attach each WHERE conjunct where its last variable becomes bound
    pre: List[A.Expr] = []
    position = {}
    for i, s in enumerate(steps):
        position.setdefault(s.var, i)
        if s.rel is not None:
            position.setdefault(s.rel.name, i)
    for c in conjuncts:
        used = [v for v in A.variables_in(c)]
        if not used:
            pre.append(c)
            continue
        at = max(position[v] for v in used)
        steps[at].filters.append(c)

    tail = []
    r = q.ret
    aggregated = any(A.contains_aggregate(i.expr) for i in r.items)
    if aggregated:
        keys = [render.expr(i.expr) for i in r.items if not A.contains_aggregate(i.expr)]
        tail.append("Aggregate(" + ", ".join(keys) + ")")
    else:
        tail.append("Project")
    if r.distinct:
        tail.append("Distinct")
    if r.order:
        tail.append("Sort")
    if r.skip is not None:
        tail.append(f"Skip({r.skip})")
    if r.limit is not None:
        tail.append(f"Limit({r.limit})")
    return Plan(steps, nodes, rels, tail, pre)
