"""Recursive-descent parser producing :mod:`assetgraph.cypher.ast` trees."""

from __future__ import annotations

from typing import List, Optional, Sequence

from . import ast as A
from .errors import CypherSyntaxError
from .lexer import Token, tokenize

MAX_DEPTH = 64

_COMPARE_OPS = ("=", "<>", "<", "<=", ">", ">=")


def _q(sym: str) -> str:
    return "'" + sym + "'"


class Parser:
    def __init__(self, text: str):
        self.tokens: List[Token] = tokenize(text)
        self.i = 0
        self.depth = 0

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def fail(self, expected: Sequence[str]):
        t = self.tok
        raise CypherSyntaxError(t.line, t.col, expected, t.describe())

    def at_sym(self, *syms: str) -> bool:
        return self.tok.kind == "SYM" and self.tok.value in syms

    def at_kw(self, *kws: str) -> bool:
        return self.tok.kind == "KW" and self.tok.value in kws

    def expect_sym(self, sym: str, also: Sequence[str] = ()) -> Token:
        if not self.at_sym(sym):
            self.fail([_q(sym), *also])
        return self.advance()

    def expect_kw(self, kw: str, also: Sequence[str] = ()) -> Token:
        if not self.at_kw(kw):
            self.fail([kw, *also])
        return self.advance()

    def pos(self) -> A.Pos:
        return A.Pos(self.tok.line, self.tok.col)

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.fail(["shallower nesting"])

    def leave(self):
        self.depth -= 1

    # -- names --------------------------------------------------------------

    def variable_name(self, expected: Sequence[str] = ("identifier",)) -> str:
        if self.tok.kind != "IDENT":
            self.fail(expected)
        return self.advance().value

    def symbolic_name(self, what: str) -> str:
        # labels, types and keys may be keywords
        if self.tok.kind in ("IDENT", "KW"):
            t = self.advance()
            return t.value if t.kind == "IDENT" else t.text
        self.fail([what])

    # -- query --------------------------------------------------------------

    def parse_query(self) -> A.QueryAst:
        if self.at_kw("CREATE"):
            q = self.create_query()
        elif self.at_kw("MATCH"):
            q = self.match_query()
        else:
            self.fail(["CREATE", "MATCH"])
        if self.at_sym(";"):
            self.advance()
        if self.tok.kind != "EOF":
            self.fail(["end of input"])
        return q

    def create_query(self) -> A.CreateQuery:
        patterns: List[A.PathPattern] = []
        while self.at_kw("CREATE"):
            self.advance()
            patterns.extend(self.pattern_list())
        return A.CreateQuery(tuple(patterns))

    def match_query(self) -> A.MatchQuery:
        matches = []
        while self.at_kw("MATCH"):
            self.advance()
            matches.append(tuple(self.pattern_list()))
        where = None
        if self.at_kw("WHERE"):
            self.advance()
            where = self.expression()
        if not self.at_kw("RETURN"):
            self.fail(["MATCH", "RETURN", "WHERE"] if where is None else ["RETURN"])
        self.advance()
        return A.MatchQuery(tuple(matches), where, self.return_body())

    def return_body(self) -> A.Return:
        distinct = False
        if self.at_kw("DISTINCT"):
            self.advance()
            distinct = True
        items = [self.return_item()]
        while self.at_sym(","):
            self.advance()
            items.append(self.return_item())
        order: List[A.OrderItem] = []
        if self.at_kw("ORDER"):
            self.advance()
            self.expect_kw("BY")
            order.append(self.order_item())
            while self.at_sym(","):
                self.advance()
                order.append(self.order_item())
        skip = limit = None
        if self.at_kw("SKIP"):
            self.advance()
            skip = self.integer()
        if self.at_kw("LIMIT"):
            self.advance()
            limit = self.integer()
        return A.Return(tuple(items), distinct, tuple(order), skip, limit)

    def integer(self) -> int:
        if self.tok.kind != "INT":
            self.fail(["integer"])
        return self.advance().value

    def return_item(self) -> A.ReturnItem:
        pos = self.pos()
        e = self.expression()
        alias = None
        if self.at_kw("AS"):
            self.advance()
            alias = self.variable_name()
        return A.ReturnItem(e, alias, pos)

    def order_item(self) -> A.OrderItem:
        e = self.expression()
        desc = False
        if self.at_kw("DESC", "DESCENDING"):
            self.advance()
            desc = True
        elif self.at_kw("ASC", "ASCENDING"):
            self.advance()
        return A.OrderItem(e, desc)

    # -- patterns -----------------------------------------------------------

    def pattern_list(self) -> List[A.PathPattern]:
        out = [self.path_pattern()]
        while self.at_sym(","):
            self.advance()
            out.append(self.path_pattern())
        return out

    def path_pattern(self) -> A.PathPattern:
        pos = self.pos()
        nodes = [self.node_pattern()]
        rels = []
        while self.at_sym("-", "<"):
            rels.append(self.rel_pattern())
            nodes.append(self.node_pattern())
        return A.PathPattern(tuple(nodes), tuple(rels), pos)

    def node_pattern(self) -> A.NodePattern:
        pos = self.pos()
        self.expect_sym("(")
        var = None
        if self.tok.kind == "IDENT":
            var = self.advance().value
        labels = []
        while self.at_sym(":"):
            self.advance()
            labels.append(self.symbolic_name("label"))
        props = ()
        if self.at_sym("{"):
            props = self.prop_map()
        if not self.at_sym(")"):
            expected = ["')'", "'{'", "':'"]
            if var is None and not labels and not props:
                expected.append("identifier")
            self.fail(expected)
        self.advance()
        return A.NodePattern(var, tuple(labels), props, pos)

    def rel_pattern(self) -> A.RelPattern:
        pos = self.pos()
        left_arrow = False
        if self.at_sym("<"):
            self.advance()
            left_arrow = True
        self.expect_sym("-")
        var, types, props = None, [], ()
        if self.at_sym("["):
            self.advance()
            if self.tok.kind == "IDENT":
                var = self.advance().value
            if self.at_sym(":"):
                self.advance()
                types.append(self.symbolic_name("relationship type"))
                while self.at_sym("|"):
                    self.advance()
                    if self.at_sym(":"):
                        self.advance()
                    types.append(self.symbolic_name("relationship type"))
            if self.at_sym("*"):
                self.fail(["']'"])  # variable-length paths are not supported
            if self.at_sym("{"):
                props = self.prop_map()
            self.expect_sym("]", ["'{'", "':'"] if not props else ())
            self.expect_sym("-")
        else:
            self.expect_sym("-", ["'['"])
        right_arrow = False
        if self.at_sym(">"):
            self.advance()
            right_arrow = True
        if left_arrow and right_arrow:
            t = self.tokens[self.i - 1]
            raise CypherSyntaxError(t.line, t.col, ["'('"], t.describe())
        direction = "in" if left_arrow else "out" if right_arrow else "both"
        return A.RelPattern(var, tuple(types), props, direction, pos)

    def prop_map(self):
        self.expect_sym("{")
        items = []
        if not self.at_sym("}"):
            while True:
                k = self.symbolic_name("property key")
                self.expect_sym(":")
                items.append((k, self.expression()))
                if self.at_sym(","):
                    self.advance()
                    continue
                break
        self.expect_sym("}", ["','"] if items else ["property key"])
        return tuple(items)

    # -- expressions --------------------------------------------------------

    def expression(self):
        self.enter()
        try:
            return self.or_expr()
        finally:
            self.leave()

    def or_expr(self):
        left = self.xor_expr()
        while self.at_kw("OR"):
            pos = self.pos()
            self.advance()
            left = A.BoolOp("OR", left, self.xor_expr(), pos)
        return left

    def xor_expr(self):
        left = self.and_expr()
        while self.at_kw("XOR"):
            pos = self.pos()
            self.advance()
            left = A.BoolOp("XOR", left, self.and_expr(), pos)
        return left

    def and_expr(self):
        left = self.not_expr()
        while self.at_kw("AND"):
            pos = self.pos()
            self.advance()
            left = A.BoolOp("AND", left, self.not_expr(), pos)
        return left

    def not_expr(self):
        if self.at_kw("NOT"):
            pos = self.pos()
            self.advance()
            self.enter()
            try:
                return A.Not(self.not_expr(), pos)
            finally:
                self.leave()
        return self.comparison()

    def comparison(self):
        left = self.unary()
        pos = self.pos()
        if self.tok.kind == "SYM" and self.tok.value in _COMPARE_OPS:
            op = self.advance().value
            return A.Compare(op, left, self.unary(), pos)
        if self.at_kw("CONTAINS"):
            self.advance()
            return A.Compare("CONTAINS", left, self.unary(), pos)
        if self.at_kw("STARTS", "ENDS"):
            op = self.advance().value
            self.expect_kw("WITH")
            return A.Compare(op + "_WITH", left, self.unary(), pos)
        if self.at_kw("IN"):
            self.advance()
            return A.Compare("IN", left, self.unary(), pos)
        if self.at_kw("IS"):
            self.advance()
            negated = False
            if self.at_kw("NOT"):
                self.advance()
                negated = True
            self.expect_kw("NULL", [] if negated else ["NOT"])
            return A.IsNull(left, negated, pos)
        return left

    def unary(self):
        if self.at_sym("-", "+"):
            sign = self.advance().value
            if self.tok.kind in ("INT", "FLOAT"):
                t = self.advance()
                value = -t.value if sign == "-" else t.value
                return A.Literal(value, A.Pos(t.line, t.col))
            self.fail(["number"])
        return self.postfix()

    def postfix(self):
        e = self.atom()
        while self.at_sym("."):
            if not isinstance(e, A.Variable):
                self.fail(["operator"])
            self.advance()
            pos = A.Pos(self.tok.line, self.tok.col)
            e = A.Property(e, self.symbolic_name("property key"), pos)
        return e

    def atom(self):
        t = self.tok
        pos = A.Pos(t.line, t.col)
        if t.kind in ("INT", "FLOAT", "STRING"):
            self.advance()
            return A.Literal(t.value, pos)
        if t.kind == "KW" and t.value in ("TRUE", "FALSE", "NULL"):
            self.advance()
            return A.Literal({"TRUE": True, "FALSE": False, "NULL": None}[t.value], pos)
        if self.at_sym("("):
            self.advance()
            e = self.expression()
            self.expect_sym(")")
            return e
        if self.at_sym("["):
            self.advance()
            items = []
            if not self.at_sym("]"):
                items.append(self.expression())
                while self.at_sym(","):
                    self.advance()
                    items.append(self.expression())
            self.expect_sym("]", ["','"])
            return A.ListLiteral(tuple(items), pos)
        if t.kind == "IDENT":
            self.advance()
            if self.at_sym("("):
                return self.call(t.value, pos)
            return A.Variable(t.value, pos)
        self.fail(["expression"])

    def call(self, fname: str, pos: A.Pos):
        lname = fname.lower()
        if lname not in A.AGGREGATES and lname not in A.SCALAR_FUNCTIONS:
            raise CypherSyntaxError(pos.line, pos.col, ["known function"], "'" + fname + "'")
        self.expect_sym("(")
        distinct = False
        args = []
        if self.at_kw("DISTINCT"):
            self.advance()
            distinct = True
        if self.at_sym("*") and lname == "count" and not distinct:
            star = self.advance()
            args.append(A.Star(A.Pos(star.line, star.col)))
        elif not self.at_sym(")"):
            args.append(self.expression())
            while self.at_sym(","):
                self.advance()
                args.append(self.expression())
        self.expect_sym(")", ["','"] if args else ["expression"])
        return A.FuncCall(lname, tuple(args), distinct, pos)


def parse(text: str) -> A.QueryAst:
    """Parse ``text``; raises :class:`CypherSyntaxError` with a position."""
    if not isinstance(text, str):
        raise TypeError("query text must be a string")
    return Parser(text).parse_query()
