"""Semantic checks run between parsing and planning."""

from __future__ import annotations

import re
from typing import Dict, List

from . import ast as A
from . import render
from .errors import CypherValidationError

_EDGE_TYPE_RE = re.compile(r"^[A-Z][A-Z0-9]*(?:_[A-Z0-9]+)*$")


def _err(msg: str, pos: A.Pos = A.Pos()):
    raise CypherValidationError(msg, pos.line, pos.col)


def _is_literal(e) -> bool:
    if isinstance(e, A.Literal):
        return True
    if isinstance(e, A.ListLiteral):
        return all(isinstance(i, A.Literal) for i in e.items)
    return False


def _check_expr(e, bound: Dict[str, str], allow_aggregate: bool) -> None:
    if isinstance(e, A.Variable):
        if e.name not in bound:
            _err(f"variable '{e.name}' is not defined", e.pos)
        return
    if isinstance(e, A.Star):
        _err("'*' is only allowed in count(*)", e.pos)
    if isinstance(e, A.FuncCall):
        if e.is_aggregate:
            if not allow_aggregate:
                _err(f"aggregate {e.name}() is not allowed here", e.pos)
            if len(e.args) != 1:
                _err(f"{e.name}() takes exactly one argument", e.pos)
            if isinstance(e.args[0], A.Star):
                return
            for arg in e.args:
                _check_expr(arg, bound, allow_aggregate=False)
            return
        expects = 1
        if len(e.args) != expects:
            _err(f"{e.name}() takes exactly one argument", e.pos)
        for arg in e.args:
            _check_expr(arg, bound, allow_aggregate=False)
        return
    for child in A.children(e):
        _check_expr(child, bound, allow_aggregate)


def _split_and(e) -> List:
    if isinstance(e, A.BoolOp) and e.op == "AND":
        return _split_and(e.left) + _split_and(e.right)
    return [e]


def validate_match(q: A.MatchQuery) -> None:
    bound: Dict[str, str] = {}
    for clause in q.matches:
        for path in clause:
            for node in path.nodes:
                if node.var is not None:
                    if bound.get(node.var, "node") != "node":
                        _err(f"variable '{node.var}' is already a relationship", node.pos)
                    bound[node.var] = "node"
                for k, v in node.props:
                    if not _is_literal(v):
                        _err(f"property '{k}' in a pattern must be a literal", node.pos)
            for rel in path.rels:
                if rel.var is not None:
                    if rel.var in bound:
                        _err(f"variable '{rel.var}' is already defined", rel.pos)
                    bound[rel.var] = "rel"
                for k, v in rel.props:
                    if not _is_literal(v):
                        _err(f"property '{k}' in a pattern must be a literal", rel.pos)
    if q.where is not None:
        _check_expr(q.where, bound, allow_aggregate=False)
    aggregated = False
    columns = set()
    aliases: Dict[str, A.Expr] = {}
    for item in q.ret.items:
        has_agg = A.contains_aggregate(item.expr)
        if has_agg and not (isinstance(item.expr, A.FuncCall) and item.expr.is_aggregate):
            _err("aggregates must appear at the top of a RETURN item", item.pos)
        aggregated = aggregated or has_agg
        _check_expr(item.expr, bound, allow_aggregate=True)
        col = item.alias if item.alias is not None else render.expr(item.expr)
        if col in columns:
            _err(f"duplicate column name '{col}'", item.pos)
        columns.add(col)
        if item.alias is not None:
            aliases[item.alias] = item.expr
    projected_only = aggregated or q.ret.distinct
    exprs = [item.expr for item in q.ret.items]
    for o in q.ret.order:
        if isinstance(o.expr, A.Variable) and o.expr.name in aliases:
            continue
        if projected_only:
            if o.expr not in exprs:
                _err(
                    "ORDER BY after aggregation or DISTINCT must use a returned expression",
                    getattr(o.expr, "pos", A.Pos()),
                )
            continue
        scope = dict(bound)
        scope.update({a: "alias" for a in aliases})
        _check_expr(o.expr, scope, allow_aggregate=False)


def validate_create(q: A.CreateQuery) -> None:
    bound: Dict[str, str] = {}
    for path in q.patterns:
        for node in path.nodes:
            if node.var is not None and node.var in bound:
                if bound[node.var] != "node":
                    _err(f"variable '{node.var}' is already a relationship", node.pos)
                if node.labels or node.props:
                    _err(f"variable '{node.var}' is already bound", node.pos)
                continue
            if not node.labels:
                if node.var is None:
                    _err("a created node needs at least one label", node.pos)
                _err(f"variable '{node.var}' is not bound", node.pos)
            for k, v in node.props:
                if not _is_literal(v):
                    _err(f"property '{k}' must be a literal", node.pos)
            if node.var is not None:
                bound[node.var] = "node"
        for rel in path.rels:
            if rel.direction == "both":
                _err("a created relationship must have a direction", rel.pos)
            if len(rel.types) != 1:
                _err("a created relationship needs exactly one type", rel.pos)
            if not _EDGE_TYPE_RE.match(rel.types[0]):
                _err(f"relationship type '{rel.types[0]}' must be UPPER_SNAKE_CASE", rel.pos)
            for k, v in rel.props:
                if not _is_literal(v):
                    _err(f"property '{k}' must be a literal", rel.pos)
            if rel.var is not None:
                if rel.var in bound:
                    _err(f"variable '{rel.var}' is already defined", rel.pos)
                bound[rel.var] = "rel"


def validate(q: A.QueryAst) -> A.QueryAst:
    if isinstance(q, A.MatchQuery):
        validate_match(q)
    else:
        validate_create(q)
    return q


split_conjuncts = _split_and
