"""Expression evaluation with Cypher three-valued logic."""

from __future__ import annotations

import math
from typing import Any, Dict, Iterable, List

from ..graph.store import Edge, Node
from ..graph.values import compare_values, index_key, is_number, sort_key, values_equal
from . import ast as A
from .errors import CypherExecutionError


def hkey(value: Any):
    """Hashable grouping / DISTINCT key."""
    if value is None:
        return ("null",)
    if isinstance(value, (Node, Edge)):
        return ("elem", value.id)
    if isinstance(value, list):
        return ("list", tuple(hkey(v) for v in value))
    k = index_key(value)
    return k if k is not None else ("repr", repr(value))


def _equal(a, b):
    if isinstance(a, (Node, Edge)) or isinstance(b, (Node, Edge)):
        if a is None or b is None:
            return None
        return a is b
    if isinstance(a, list) or isinstance(b, list):
        if a is None or b is None:
            return None
        if not (isinstance(a, list) and isinstance(b, list)) or len(a) != len(b):
            return False
        result = True
        for x, y in zip(a, b):
            r = _equal(x, y)
            if r is False:
                return False
            if r is None:
                result = None
        return result
    return values_equal(a, b)


def _compare(op: str, a, b):
    if op == "=":
        return _equal(a, b)
    if op == "<>":
        r = _equal(a, b)
        return None if r is None else not r
    if op == "IN":
        if b is None:
            return None
        if not isinstance(b, list):
            return False
        saw_null = False
        for item in b:
            r = _equal(a, item)
            if r is True:
                return True
            if r is None:
                saw_null = True
        return None if saw_null or a is None else False
    if a is None or b is None:
        return None
    if op in ("CONTAINS", "STARTS_WITH", "ENDS_WITH"):
        if not (isinstance(a, str) and isinstance(b, str)):
            return False
        if op == "CONTAINS":
            return b in a
        if op == "STARTS_WITH":
            return a.startswith(b)
        return a.endswith(b)
    c = compare_values(a, b)
    if c is None:
        return False
    return {"<": c < 0, "<=": c <= 0, ">": c > 0, ">=": c >= 0}[op]


def _scalar_fn(name: str, v):
    if v is None:
        return None
    if name == "tolower":
        return v.lower() if isinstance(v, str) else None
    if name == "toupper":
        return v.upper() if isinstance(v, str) else None
    if name == "id":
        return v.id if isinstance(v, (Node, Edge)) else None
    if name == "labels":
        return sorted(v.labels) if isinstance(v, Node) else None
    if name == "type":
        return v.type if isinstance(v, Edge) else None
    raise CypherExecutionError(f"unknown function {name}()")


def evaluate(e, env: Dict[str, Any]):
    if isinstance(e, A.Literal):
        return e.value
    if isinstance(e, A.Variable):
        return env.get(e.name)
    if isinstance(e, A.Property):
        subject = env.get(e.subject.name)
        if isinstance(subject, (Node, Edge)):
            return subject.properties.get(e.key)
        return None
    if isinstance(e, A.Compare):
        return _compare(e.op, evaluate(e.left, env), evaluate(e.right, env))
    if isinstance(e, A.BoolOp):
        left = evaluate(e.left, env)
        if e.op == "AND":
            if left is False:
                return False
            right = evaluate(e.right, env)
            if right is False:
                return False
            return True if (left is True and right is True) else None
        if e.op == "OR":
            if left is True:
                return True
            right = evaluate(e.right, env)
            if right is True:
                return True
            return False if (left is False and right is False) else None
        right = evaluate(e.right, env)
        if not isinstance(left, bool) or not isinstance(right, bool):
            return None
        return left != right
    if isinstance(e, A.Not):
        v = evaluate(e.expr, env)
        return (not v) if isinstance(v, bool) else None
    if isinstance(e, A.IsNull):
        v = evaluate(e.expr, env)
        return (v is not None) if e.negated else (v is None)
    if isinstance(e, A.ListLiteral):
        return [evaluate(i, env) for i in e.items]
    if isinstance(e, A.FuncCall):
        if e.is_aggregate:
            raise CypherExecutionError(f"aggregate {e.name}() evaluated outside RETURN")
        return _scalar_fn(e.name, evaluate(e.args[0], env))
    raise CypherExecutionError(f"cannot evaluate {type(e).__name__}")


def truthy(v) -> bool:
    return v is True


def aggregate(call: A.FuncCall, envs: Iterable[Dict[str, Any]]):
    name = call.name
    arg = call.args[0]
    if isinstance(arg, A.Star):
        return sum(1 for _ in envs)
    values: List[Any] = [v for v in (evaluate(arg, env) for env in envs) if v is not None]
    if call.distinct:
        seen = {}
        for v in values:
            seen.setdefault(hkey(v), v)
        values = list(seen.values())
    if name == "count":
        return len(values)
    if name == "collect":
        return values
    if name in ("sum", "avg"):
        nums = [v for v in values if is_number(v)]
        if name == "sum":
            if all(isinstance(v, int) for v in nums):
                return sum(nums)
            return math.fsum(nums)
        if not nums:
            return None
        return math.fsum(nums) / len(nums)
    if not values:
        return None
    pick = min if name == "min" else max
    return pick(values, key=sort_key)
