"""Query AST. Nodes are frozen dataclasses; source positions do not take
part in equality so that a re-parsed canonical rendering compares equal."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

AGGREGATES = frozenset({"count", "sum", "avg", "min", "max", "collect"})
SCALAR_FUNCTIONS = frozenset({"tolower", "toupper", "id", "labels", "type"})


@dataclass(frozen=True)
class Pos:
    line: int = 0
    col: int = 0


def _pos():
    return field(default=Pos(), compare=False, repr=False)


# -- expressions ------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    value: Union[str, int, float, bool, None]
    pos: Pos = _pos()


@dataclass(frozen=True)
class ListLiteral:
    items: Tuple["Expr", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Variable:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Property:
    subject: Variable
    key: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Star:
    pos: Pos = _pos()


@dataclass(frozen=True)
class FuncCall:
    name: str  # lowercased
    args: Tuple["Expr", ...]
    distinct: bool = False
    pos: Pos = _pos()

    @property
    def is_aggregate(self) -> bool:
        return self.name in AGGREGATES


@dataclass(frozen=True)
class Compare:
    op: str  # = <> < <= > >= CONTAINS STARTS_WITH ENDS_WITH IN
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class IsNull:
    expr: "Expr"
    negated: bool = False
    pos: Pos = _pos()


@dataclass(frozen=True)
class Not:
    expr: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class BoolOp:
    op: str  # AND OR XOR
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


Expr = Union[Literal, ListLiteral, Variable, Property, Star, FuncCall, Compare, IsNull, Not, BoolOp]


# -- patterns ---------------------------------------------------------------


@dataclass(frozen=True)
class NodePattern:
    var: Optional[str]
    labels: Tuple[str, ...] = ()
    props: Tuple[Tuple[str, Expr], ...] = ()
    pos: Pos = _pos()


@dataclass(frozen=True)
class RelPattern:
    var: Optional[str]
    types: Tuple[str, ...] = ()
    props: Tuple[Tuple[str, Expr], ...] = ()
    direction: str = "out"  # out: (a)-->(b); in: (a)<--(b); both: (a)--(b)
    pos: Pos = _pos()


@dataclass(frozen=True)
class PathPattern:
    nodes: Tuple[NodePattern, ...]
    rels: Tuple[RelPattern, ...] = ()
    pos: Pos = _pos()


# -- clauses ----------------------------------------------------------------


@dataclass(frozen=True)
class ReturnItem:
    expr: Expr
    alias: Optional[str] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class OrderItem:
    expr: Expr
    descending: bool = False


@dataclass(frozen=True)
class Return:
    items: Tuple[ReturnItem, ...]
    distinct: bool = False
    order: Tuple[OrderItem, ...] = ()
    skip: Optional[int] = None
    limit: Optional[int] = None


@dataclass(frozen=True)
class MatchQuery:
    matches: Tuple[Tuple[PathPattern, ...], ...]
    where: Optional[Expr]
    ret: Return


@dataclass(frozen=True)
class CreateQuery:
    patterns: Tuple[PathPattern, ...]


QueryAst = Union[MatchQuery, CreateQuery]


def contains_aggregate(expr) -> bool:
    if isinstance(expr, FuncCall):
        return expr.is_aggregate or any(contains_aggregate(a) for a in expr.args)
    for child in children(expr):
        if contains_aggregate(child):
            return True
    return False


def children(expr):
    if isinstance(expr, (Compare, BoolOp)):
        return (expr.left, expr.right)
    if isinstance(expr, (Not, IsNull)):
        return (expr.expr,)
    if isinstance(expr, FuncCall):
        return expr.args
    if isinstance(expr, ListLiteral):
        return expr.items
    if isinstance(expr, Property):
        return (expr.subject,)
    return ()


def variables_in(expr) -> set:
    if isinstance(expr, Variable):
        return {expr.name}
    out = set()
    for child in children(expr):
        out |= variables_in(child)
    return out
