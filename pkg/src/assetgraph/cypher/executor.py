"""Plan execution, projection, aggregation and CREATE materialization."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from ..graph.store import Direction, GraphStore, Node, Provenance
from ..graph.values import normalize_value, parse_timestamp, render_value, sort_key, values_equal
from . import ast as A
from . import render
from .errors import CypherValidationError
from .evaluate import aggregate, evaluate, hkey, truthy
from .parser import parse
from .planner import NodeVar, Plan, RelVar, Step, plan as make_plan
from .validate import validate


@dataclass
class ResultTable:
    columns: List[str]
    rows: List[Tuple[Any, ...]]
    plan: Optional[Plan] = field(default=None, compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> List[Any]:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def scalar(self) -> Any:
        if len(self.rows) != 1 or len(self.columns) != 1:
            raise ValueError("result is not a single cell")
        return self.rows[0][0]

    def records(self) -> List[Dict[str, Any]]:
        return [dict(zip(self.columns, row)) for row in self.rows]

    def render(self, max_rows: Optional[int] = None) -> str:
        """Aligned text table."""
        rows = self.rows if max_rows is None else self.rows[:max_rows]
        cells = [[_cell_text(v) for v in row] for row in rows]
        widths = [len(c) for c in self.columns]
        for row in cells:
            widths = [max(w, len(c)) for w, c in zip(widths, row)]
        lines = [" | ".join(c.ljust(w) for c, w in zip(self.columns, widths)).rstrip()]
        lines.append("-+-".join("-" * w for w in widths))
        for row in cells:
            lines.append(" | ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        return "\n".join(lines)


def _cell_text(v: Any) -> str:
    if isinstance(v, Node):
        props = ", ".join(
            f"{k}: {render_value(x)}" for k, x in sorted(v.properties.items()) if k != "embedding"
        )
        return f"(:{':'.join(sorted(v.labels))} {{{props}}})"
    if isinstance(v, list):
        return "[" + ", ".join(_cell_text(x) for x in v) + "]"
    if hasattr(v, "type") and hasattr(v, "src"):
        return f"[:{v.type}]"
    return render_value(v)


# -- pattern matching -------------------------------------------------------


def _node_ok(node: Node, var: NodeVar) -> bool:
    for label in var.labels:
        if label not in node.labels:
            return False
    for k, v in var.props:
        if values_equal(node.properties.get(k), v) is not True:
            return False
    return True


def _edge_ok(edge, rel: RelVar) -> bool:
    if rel.types and edge.type not in rel.types:
        return False
    for k, v in rel.props:
        if values_equal(edge.properties.get(k), v) is not True:
            return False
    return True


class _Matcher:
    def __init__(self, graph: GraphStore, p: Plan):
        self.graph = graph
        self.plan = p
        self.clause_rels: Dict[int, List[str]] = {}
        for r in p.rels:
            self.clause_rels.setdefault(r.clause, []).append(r.name)

    def run(self) -> Iterator[Dict[str, Any]]:
        env: Dict[str, Any] = {}
        for f in self.plan.pre_filters:
            if not truthy(evaluate(f, env)):
                return iter(())
        return self._step(0, env)

    def _candidates(self, step: Step, env) -> Iterator[Tuple[Any, Any]]:
        g = self.graph
        if step.kind == "AllNodesScan":
            for n in g.nodes():
                yield None, n
        elif step.kind == "LabelScan":
            for nid in g.nodes_by_label(step.label):
                yield None, g.node(nid)
        elif step.kind == "IndexSeek":
            ids = g.nodes_by_property(step.label, step.key, step.value)
            if isinstance(step.value, str):
                try:
                    ts = parse_timestamp(step.value)
                except ValueError:
                    pass
                else:
                    ids = ids + g.nodes_by_property(step.label, step.key, ts)
            for nid in ids:
                yield None, g.node(nid)
        else:
            rel = step.rel
            src = env[step.source]
            if rel.direction == "both":
                direction = Direction.BOTH
            elif (rel.direction == "out") == (step.source == rel.left):
                direction = Direction.OUT
            else:
                direction = Direction.IN
            for edge, other in g.neighbors(src.id, rel.types or None, direction):
                if step.kind == "ExpandInto":
                    if other is not env[step.var]:
                        continue
                yield edge, other

    def _step(self, i: int, env: Dict[str, Any]) -> Iterator[Dict[str, Any]]:
        steps = self.plan.steps
        if i == len(steps):
            yield dict(env)
            return
        step = steps[i]
        var = self.plan.nodes[step.var]
        for edge, node in self._candidates(step, env):
            if edge is not None:
                rel = step.rel
                if not _edge_ok(edge, rel):
                    continue
                # relationship isomorphism within one MATCH clause
                if any(
                    env.get(other) is edge
                    for other in self.clause_rels[rel.clause]
                    if other != rel.name
                ):
                    continue
            if step.kind != "ExpandInto":
                if not _node_ok(node, var):
                    continue
                env[step.var] = node
            if edge is not None:
                env[step.rel.name] = edge
            if all(truthy(evaluate(f, env)) for f in step.filters):
                yield from self._step(i + 1, env)
            if edge is not None:
                del env[step.rel.name]
            if step.kind != "ExpandInto":
                del env[step.var]


# -- projection -------------------------------------------------------------


def _tiebreak(env: Dict[str, Any], order: Sequence[str]) -> Tuple:
    return tuple(env[name].seq if name in env else -1 for name in order)


def _column(item: A.ReturnItem) -> str:
    return item.alias if item.alias is not None else render.expr(item.expr)


def execute(
    q: A.MatchQuery,
    graph: GraphStore,
    use_indexes: bool = True,
    force_start: Optional[str] = None,
) -> ResultTable:
    """Run a validated MATCH query."""
    p = make_plan(q, graph, use_indexes=use_indexes, force_start=force_start)
    r = q.ret
    columns = [_column(i) for i in r.items]
    order_names = p.var_order
    aggregated = any(A.contains_aggregate(i.expr) for i in r.items)
    envs = _Matcher(graph, p).run()

    # rows: (values, tiebreak, env-or-None)
    rows: List[Tuple[Tuple, Tuple, Optional[Dict[str, Any]]]] = []
    if aggregated:
        key_items = [k for k, i in enumerate(r.items) if not A.contains_aggregate(i.expr)]
        groups: Dict[Tuple, List[Dict[str, Any]]] = {}
        group_vals: Dict[Tuple, List[Any]] = {}
        for env in envs:
            vals = [evaluate(r.items[k].expr, env) for k in key_items]
            gk = tuple(hkey(v) for v in vals)
            if gk not in groups:
                groups[gk] = []
                group_vals[gk] = vals
            groups[gk].append(env)
        if not groups and not key_items:
            groups[()] = []
            group_vals[()] = []
        for gk, members in groups.items():
            keyed = dict(zip(key_items, group_vals[gk]))
            values = tuple(
                keyed[k] if k in keyed else aggregate(item.expr, members)
                for k, item in enumerate(r.items)
            )
            tb = min((_tiebreak(e, order_names) for e in members), default=())
            rows.append((values, tb, None))
    else:
        for env in envs:
            values = tuple(evaluate(i.expr, env) for i in r.items)
            rows.append((values, _tiebreak(env, order_names), env))

    if r.distinct:
        seen: Dict[Tuple, int] = {}
        unique = []
        for values, tb, env in rows:
            k = tuple(hkey(v) for v in values)
            if k in seen:
                j = seen[k]
                if tb < unique[j][1]:
                    unique[j] = (unique[j][0], tb, unique[j][2])
                continue
            seen[k] = len(unique)
            unique.append((values, tb, env))
        rows = unique

    if r.order:
        rows.sort(key=lambda row: row[1])
        aliases = {i.alias: k for k, i in enumerate(r.items) if i.alias is not None}
        exprs = [i.expr for i in r.items]
        for o in reversed(r.order):
            if isinstance(o.expr, A.Variable) and o.expr.name in aliases:
                idx = aliases[o.expr.name]
                keyfn = lambda row, idx=idx: sort_key(row[0][idx])
            elif o.expr in exprs:
                idx = exprs.index(o.expr)
                keyfn = lambda row, idx=idx: sort_key(row[0][idx])
            else:
                def keyfn(row, e=o.expr):
                    scope = dict(row[2])
                    scope.update({a: row[0][k] for a, k in aliases.items()})
                    return sort_key(evaluate(e, scope))
            rows.sort(key=keyfn, reverse=o.descending)

    out = [row[0] for row in rows]
    if r.skip is not None:
        out = out[r.skip :]
    if r.limit is not None:
        out = out[: r.limit]
    return ResultTable(columns, out, p)


# -- CREATE -----------------------------------------------------------------


@dataclass
class CreateResult:
    node_ids: List[str]
    edge_ids: List[str]


def _precheck_create(q: A.CreateQuery) -> None:
    # reject bad values before the first write so a failed CREATE leaves no trace
    for path in q.patterns:
        for elem in list(path.nodes) + list(path.rels):
            for k, v in elem.props:
                try:
                    value = evaluate(v, {})
                    if value is not None:
                        normalize_value(value)
                except (TypeError, ValueError) as exc:
                    raise CypherValidationError(
                        f"property '{k}': {exc}", elem.pos.line, elem.pos.col
                    ) from None


def execute_create(
    q: A.CreateQuery, graph: GraphStore, provenance: Provenance = Provenance.DATA
) -> CreateResult:
    """Materialize a validated CREATE query.

    LLM provenance forces ``source: 'LLM-derived'`` on created nodes.
    """
    validate(q)
    _precheck_create(q)
    nodes: List[str] = []
    edges: List[str] = []
    with graph.lock:
        env: Dict[str, str] = {}
        for path in q.patterns:
            ids = []
            for np_ in path.nodes:
                if np_.var is not None and np_.var in env:
                    ids.append(env[np_.var])
                    continue
                props = {k: evaluate(v, {}) for k, v in np_.props}
                nid = graph.create_node(np_.labels, props, provenance)
                nodes.append(nid)
                ids.append(nid)
                if np_.var is not None:
                    env[np_.var] = nid
            for i, rel in enumerate(path.rels):
                src, dst = ids[i], ids[i + 1]
                if rel.direction == "in":
                    src, dst = dst, src
                props = {k: evaluate(v, {}) for k, v in rel.props}
                edges.append(graph.create_edge(rel.types[0], src, dst, props))
    return CreateResult(nodes, edges)


def run(graph: GraphStore, text: str, provenance: Provenance = Provenance.DATA, use_indexes: bool = True):
    """Parse, validate and execute; returns a ResultTable or CreateResult."""
    q = validate(parse(text))
    if isinstance(q, A.CreateQuery):
        return execute_create(q, graph, provenance)
    return execute(q, graph, use_indexes=use_indexes)
