"""Canonical text rendering: uppercase keywords, single spaces, single quotes."""

from __future__ import annotations

import re

from . import ast as A
from .lexer import KEYWORDS

_PLAIN_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

_FUNC_NAMES = {"tolower": "toLower", "toupper": "toUpper"}


def name(text: str) -> str:
    if _PLAIN_NAME.match(text) and text.upper() not in KEYWORDS:
        return text
    return "`" + text + "`"


def key(text: str) -> str:
    # property keys and labels may be keywords, they follow ':' or '.'
    return text if _PLAIN_NAME.match(text) else "`" + text + "`"


def string(value: str) -> str:
    out = value.replace("\\", "\\\\").replace("'", "\\'")
    out = out.replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r")
    return "'" + out + "'"


_PREC = {"OR": 1, "XOR": 2, "AND": 3}


def expr(e, parent_prec: int = 0) -> str:
    if isinstance(e, A.Literal):
        v = e.value
        if v is None:
            return "NULL"
        if v is True:
            return "TRUE"
        if v is False:
            return "FALSE"
        if isinstance(v, str):
            return string(v)
        return repr(v)
    if isinstance(e, A.ListLiteral):
        return "[" + ", ".join(expr(i) for i in e.items) + "]"
    if isinstance(e, A.Variable):
        return name(e.name)
    if isinstance(e, A.Property):
        return expr(e.subject) + "." + key(e.key)
    if isinstance(e, A.Star):
        return "*"
    if isinstance(e, A.FuncCall):
        inner = ", ".join(expr(a) for a in e.args)
        if e.distinct:
            inner = "DISTINCT " + inner
        return _FUNC_NAMES.get(e.name, e.name) + "(" + inner + ")"
    if isinstance(e, A.Compare):
        op = e.op.replace("_", " ")
        text = f"{expr(e.left, 10)} {op} {expr(e.right, 10)}"
        return f"({text})" if parent_prec >= 10 else text
    if isinstance(e, A.IsNull):
        text = f"{expr(e.expr, 10)} IS {'NOT ' if e.negated else ''}NULL"
        return f"({text})" if parent_prec >= 10 else text
    if isinstance(e, A.Not):
        text = "NOT " + expr(e.expr, 5)
        return f"({text})" if parent_prec > 5 else text
    if isinstance(e, A.BoolOp):
        prec = _PREC[e.op]
        # left-associative: the right operand needs parens at equal precedence
        text = f"{expr(e.left, prec)} {e.op} {expr(e.right, prec + 0.5)}"
        return f"({text})" if parent_prec > prec else text
    raise TypeError(f"cannot render {e!r}")


def _props(props) -> str:
    if not props:
        return ""
    return " {" + ", ".join(f"{key(k)}: {expr(v)}" for k, v in props) + "}"


def node(p: A.NodePattern) -> str:
    body = name(p.var) if p.var else ""
    body += "".join(":" + key(label) for label in p.labels)
    props = _props(p.props)
    if props and not body:
        props = props.lstrip()
    return "(" + body + props + ")"


def rel(r: A.RelPattern) -> str:
    body = name(r.var) if r.var else ""
    if r.types:
        body += ":" + "|".join(key(t) for t in r.types)
    props = _props(r.props)
    if props and not body:
        props = props.lstrip()
    inner = "[" + body + props + "]"
    if r.direction == "out":
        return "-" + inner + "->"
    if r.direction == "in":
        return "<-" + inner + "-"
    return "-" + inner + "-"


def path(p: A.PathPattern) -> str:
    out = node(p.nodes[0])
    for r, n in zip(p.rels, p.nodes[1:]):
        out += rel(r) + node(n)
    return out


def query(q) -> str:
    if isinstance(q, A.CreateQuery):
        return "CREATE " + ", ".join(path(p) for p in q.patterns)
    parts = []
    for clause in q.matches:
        parts.append("MATCH " + ", ".join(path(p) for p in clause))
    if q.where is not None:
        parts.append("WHERE " + expr(q.where))
    r = q.ret
    items = []
    for item in r.items:
        text = expr(item.expr)
        if item.alias is not None:
            text += " AS " + name(item.alias)
        items.append(text)
    parts.append("RETURN " + ("DISTINCT " if r.distinct else "") + ", ".join(items))
    if r.order:
        parts.append(
            "ORDER BY "
            + ", ".join(expr(o.expr) + (" DESC" if o.descending else "") for o in r.order)
        )
    if r.skip is not None:
        parts.append(f"SKIP {r.skip}")
    if r.limit is not None:
        parts.append(f"LIMIT {r.limit}")
    return " ".join(parts)
