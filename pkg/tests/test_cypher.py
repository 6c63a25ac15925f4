from __future__ import annotations

import random
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from assetgraph.cypher import (
    CypherError,
    CypherSyntaxError,
    CypherValidationError,
    execute_create,
    parse,
    render,
    run,
    validate,
)
from assetgraph.graph import GraphStore, Provenance

LABELS = ("A", "B")
TYPES = ("R", "S")
STRINGS = ("x", "y", "z")
OPS = ("=", "<>", "<", "<=", ">", ">=")


# -- random graphs and queries, plus a nested-scan oracle ----------------------


def random_graph(rng: random.Random) -> GraphStore:
    g = GraphStore()
    n = rng.randint(2, 9)
    for _ in range(n):
        labels = rng.sample(LABELS, rng.randint(1, 2))
        props: Dict[str, Any] = {}
        if rng.random() < 0.8:
            props["v"] = rng.randint(0, 4)
        if rng.random() < 0.7:
            props["s"] = rng.choice(STRINGS)
        g.create_node(labels, props)
    ids = [x.id for x in g.nodes()]
    for _ in range(rng.randint(n, 3 * n)):
        g.create_edge(rng.choice(TYPES), rng.choice(ids), rng.choice(ids), {"w": rng.randint(0, 3)})
    return g


@dataclass
class NodeSpec:
    var: str
    label: Optional[str]
    props: Dict[str, Any] = field(default_factory=dict)


@dataclass
class RelSpec:
    type: Optional[str]
    direction: str  # "->", "<-" or "-"


@dataclass
class Cond:
    """Leaf comparisons and boolean combinations; evaluated with three-valued logic."""

    op: str
    args: Tuple


@dataclass
class QuerySpec:
    nodes: List[NodeSpec]
    rels: List[RelSpec]
    where: Optional[Cond]
    returns: List[Tuple[str, str]]  # (var, prop) or ("count", "*")
    distinct: bool

    def text(self) -> str:
        parts = [_node_text(self.nodes[0])]
        for r, n in zip(self.rels, self.nodes[1:]):
            body = f"[:{r.type}]" if r.type else ""
            if r.direction == "->":
                parts.append(f"-{body}->")
            elif r.direction == "<-":
                parts.append(f"<-{body}-")
            else:
                parts.append(f"-{body}-")
            parts.append(_node_text(n))
        q = "MATCH " + "".join(parts)
        if self.where is not None:
            q += " WHERE " + _cond_text(self.where)
        items = ["count(*)" if v == "count" else f"{v}.{p}" for v, p in self.returns]
        q += " RETURN " + ("DISTINCT " if self.distinct else "") + ", ".join(items)
        return q


def _lit(v: Any) -> str:
    return f"'{v}'" if isinstance(v, str) else str(v)


def _node_text(n: NodeSpec) -> str:
    out = n.var + (f":{n.label}" if n.label else "")
    if n.props:
        out += " {" + ", ".join(f"{k}: {_lit(v)}" for k, v in n.props.items()) + "}"
    return f"({out})"


def _cond_text(c: Cond) -> str:
    if c.op == "cmp":
        var, prop, op, rhs = c.args
        right = f"{rhs[0]}.{rhs[1]}" if isinstance(rhs, tuple) else _lit(rhs)
        return f"{var}.{prop} {op} {right}"
    if c.op == "null":
        var, prop, neg = c.args
        return f"{var}.{prop} IS {'NOT ' if neg else ''}NULL"
    if c.op == "not":
        return f"NOT ({_cond_text(c.args[0])})"
    return f"({_cond_text(c.args[0])} {c.op.upper()} {_cond_text(c.args[1])})"


def random_cond(rng: random.Random, vars_: List[str], depth: int = 0) -> Cond:
    r = rng.random()
    if depth < 2 and r < 0.3:
        return Cond(rng.choice(["and", "or"]), (random_cond(rng, vars_, depth + 1), random_cond(rng, vars_, depth + 1)))
    if depth < 2 and r < 0.4:
        return Cond("not", (random_cond(rng, vars_, depth + 1),))
    if r < 0.5:
        return Cond("null", (rng.choice(vars_), rng.choice("vs"), rng.random() < 0.5))
    var = rng.choice(vars_)
    if rng.random() < 0.6:
        prop = "v"
        rhs: Any = rng.randint(0, 4) if rng.random() < 0.7 else (rng.choice(vars_), "v")
        return Cond("cmp", (var, prop, rng.choice(OPS), rhs))
    return Cond("cmp", (var, "s", rng.choice(["=", "<>"]), rng.choice(STRINGS)))


def random_query(rng: random.Random) -> QuerySpec:
    hops = rng.choice([0, 1, 1, 2])
    vars_ = ["a", "b", "c"][: hops + 1]
    nodes = []
    for v in vars_:
        props = {}
        if rng.random() < 0.2:
            props["v"] = rng.randint(0, 4)
        if rng.random() < 0.1:
            props["s"] = rng.choice(STRINGS)
        nodes.append(NodeSpec(v, rng.choice((None,) + LABELS), props))
    rels = [RelSpec(rng.choice((None,) + TYPES), rng.choice(["->", "<-", "-"])) for _ in range(hops)]
    where = random_cond(rng, vars_) if rng.random() < 0.7 else None
    shape = rng.random()
    if shape < 0.2:
        returns = [("count", "*")]
    elif shape < 0.35:
        returns = [(rng.choice(vars_), "s"), ("count", "*")]
    else:
        pool = [(v, p) for v in vars_ for p in "vs"]
        returns = rng.sample(pool, rng.randint(1, min(3, len(pool))))
    return QuerySpec(nodes, rels, where, returns, rng.random() < 0.25)


def _cmp(a: Any, op: str, b: Any) -> Optional[bool]:
    if a is None or b is None:
        return None
    return {"=": a == b, "<>": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]


def _eval(c: Cond, env: Dict[str, Dict[str, Any]]) -> Optional[bool]:
    if c.op == "cmp":
        var, prop, op, rhs = c.args
        right = env[rhs[0]].get(rhs[1]) if isinstance(rhs, tuple) else rhs
        return _cmp(env[var].get(prop), op, right)
    if c.op == "null":
        var, prop, neg = c.args
        is_null = env[var].get(prop) is None
        return not is_null if neg else is_null
    if c.op == "not":
        v = _eval(c.args[0], env)
        return None if v is None else not v
    a, b = _eval(c.args[0], env), _eval(c.args[1], env)
    if c.op == "and":
        if a is False or b is False:
            return False
        return None if a is None or b is None else True
    if a is True or b is True:
        return True
    return None if a is None or b is None else False


def oracle(g: GraphStore, q: QuerySpec) -> Counter:
    nodes = list(g.nodes())
    edges = list(g.edges())

    def node_ok(n, spec: NodeSpec) -> bool:
        if spec.label and spec.label not in n.labels:
            return False
        return all(n.properties.get(k) == v for k, v in spec.props.items())

    def edge_ok(e, rel: RelSpec, left, right) -> bool:
        if rel.type and e.type != rel.type:
            return False
        if rel.direction == "->":
            return e.src == left.id and e.dst == right.id
        if rel.direction == "<-":
            return e.src == right.id and e.dst == left.id
        return (e.src == left.id and e.dst == right.id) or (e.src == right.id and e.dst == left.id)

    bindings = []

    def walk(i: int, chosen_nodes: list, chosen_edges: list) -> None:
        if i == len(q.nodes):
            bindings.append(list(chosen_nodes))
            return
        for n in nodes:
            if not node_ok(n, q.nodes[i]):
                continue
            if i == 0:
                walk(1, [n], [])
                continue
            for e in edges:
                if e.id in chosen_edges or not edge_ok(e, q.rels[i - 1], chosen_nodes[-1], n):
                    continue
                walk(i + 1, chosen_nodes + [n], chosen_edges + [e.id])

    walk(0, [], [])
    rows = []
    for b in bindings:
        env = {spec.var: n.properties for spec, n in zip(q.nodes, b)}
        if q.where is not None and _eval(q.where, env) is not True:
            continue
        rows.append(tuple(None if v == "count" else env[v].get(p) for v, p in q.returns))
    if any(v == "count" for v, _ in q.returns):
        groups: Counter = Counter(tuple(x for x, (v, _) in zip(r, q.returns) if v != "count") for r in rows)
        if not groups and len(q.returns) == 1:
            return Counter({(0,): 1})
        out = Counter()
        for key, n in groups.items():
            it = iter(key)
            out[tuple(n if v == "count" else next(it) for v, _ in q.returns)] += 1
        return out
    if q.distinct:
        return Counter(set(rows))
    return Counter(rows)


def make_case(seed: int) -> Tuple[GraphStore, QuerySpec]:
    rng = random.Random(seed)
    return random_graph(rng), random_query(rng)


class TestOracleEquivalence:
    def test_500_random_cases(self):
        t0 = time.perf_counter()
        mismatches = []
        for seed in range(500):
            g, q = make_case(seed)
            got = Counter(run(g, q.text()).rows)
            if got != oracle(g, q):
                mismatches.append((seed, q.text()))
        assert time.perf_counter() - t0 < 60
        assert mismatches == []

    @pytest.mark.parametrize("seed", range(0, 500, 50))
    def test_index_use_does_not_change_results(self, seed):
        g, q = make_case(seed)
        assert Counter(run(g, q.text()).rows) == Counter(run(g, q.text(), use_indexes=False).rows)


# -- hand-checked semantics --------------------------------------------------


def chain() -> GraphStore:
    g = GraphStore()
    for i, name in enumerate(["p", "q", "r", "s"]):
        g.create_node(["Equipment"], {"name": name, "rank": i, "equipment_id": name.upper()})
    g.create_edge("DEPENDS_ON", "n1", "n2")
    g.create_edge("DEPENDS_ON", "n2", "n3")
    g.create_edge("DEPENDS_ON", "n3", "n3")
    return g


class TestSemantics:
    @pytest.mark.parametrize(
        "query,expected",
        [
            ("MATCH (e:Equipment) RETURN e.name ORDER BY e.rank DESC LIMIT 2", [("s",), ("r",)]),
            ("MATCH (e:Equipment) RETURN e.name ORDER BY e.rank SKIP 1 LIMIT 2", [("q",), ("r",)]),
            ("MATCH (a)-[:DEPENDS_ON]->(b) RETURN a.name, b.name", [("p", "q"), ("q", "r"), ("r", "r")]),
            ("MATCH (a)-[:DEPENDS_ON]-(b {name: 'r'}) RETURN a.name", [("q",), ("r",)]),
            ("MATCH (e:Equipment) WHERE e.name STARTS WITH 'q' OR e.name ENDS WITH 's' RETURN e.rank", [(1,), (3,)]),
            ("MATCH (e:Equipment) WHERE e.name IN ['p', 's'] RETURN count(e) AS n", [(2,)]),
            ("MATCH (e:Equipment) WHERE e.missing IS NULL RETURN count(*)", [(4,)]),
            ("MATCH (e:Equipment) RETURN collect(e.name) AS names", [(["p", "q", "r", "s"],)]),
            ("MATCH (e:Equipment) WHERE e.name CONTAINS 'zz' RETURN count(*)", [(0,)]),
            ("MATCH (e:Equipment) RETURN min(e.rank), max(e.rank), sum(e.rank), avg(e.rank)", [(0, 3, 6, 1.5)]),
        ],
    )
    def test_expected_rows(self, query, expected):
        assert run(chain(), query).rows == expected

    def test_property_seek_uses_index(self):
        t = run(chain(), "MATCH (e:Equipment {equipment_id: 'Q'}) RETURN e.name")
        assert t.rows == [("q",)]
        assert any(step.startswith("NodeIndexSeek") or "IndexSeek" in step for step in t.plan.describe())

    @pytest.mark.parametrize(
        "query,error",
        [
            ("MATCH (e RETURN e", CypherSyntaxError),
            ("MATCH (e) RETURN x", CypherValidationError),
            ("MATCH (e) RETURN e ORDER BY", CypherSyntaxError),
            ("RETURN 1 +", CypherSyntaxError),
        ],
    )
    def test_errors_carry_positions(self, query, error):
        with pytest.raises(error) as info:
            run(chain(), query)
        assert info.value.line >= 1 or isinstance(info.value, CypherValidationError)
        assert "\n" not in str(info.value)

    def test_parser_depth_is_capped(self):
        deep = "MATCH (e) WHERE " + "(" * 200 + "e.rank = 1" + ")" * 200 + " RETURN e"
        with pytest.raises(CypherError):
            run(chain(), deep)

    def test_create_tags_llm_provenance(self):
        g = chain()
        q = validate(parse("CREATE (m:Equipment {name: 'motor'})-[:EXPERIENCED]->(f:FailureMode {name: 'wear'})"))
        res = execute_create(q, g, Provenance.LLM)
        assert len(res.node_ids) == 2 and len(res.edge_ids) == 1
        assert all(g.node(n).get("source") == "LLM-derived" for n in res.node_ids)

    def test_match_is_read_only(self):
        g = chain()
        run(g, "MATCH (a)-[r]->(b) RETURN a, r, b")
        assert g.node_count == 4 and g.edge_count == 3


class TestRender:
    @pytest.mark.parametrize("seed", range(40))
    def test_render_parse_fixed_point(self, seed):
        _, q = make_case(seed)
        text = render(parse(q.text()))
        assert render(parse(text)) == text

    @settings(max_examples=80, deadline=None)
    @given(st.text(alphabet="ab'\\\" é\n", max_size=10))
    def test_string_literals_survive_rendering(self, s):
        g = GraphStore()
        g.create_node(["L"], {"s": s})
        esc = s.replace("\\", "\\\\").replace("'", "\\'").replace("\n", "\\n")
        text = render(parse(f"MATCH (n:L) WHERE n.s = '{esc}' RETURN n.s"))
        assert run(g, text).rows == [(s,)]
