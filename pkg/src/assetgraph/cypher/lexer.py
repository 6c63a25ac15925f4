"""Tokenizer for the supported Cypher subset."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

from .errors import CypherSyntaxError

KEYWORDS = frozenset(
    """
    MATCH WHERE RETURN DISTINCT ORDER BY ASC ASCENDING DESC DESCENDING LIMIT SKIP
    CREATE AND OR XOR NOT AS CONTAINS STARTS ENDS WITH IN IS NULL TRUE FALSE
    OPTIONAL MERGE CALL UNWIND DELETE DETACH SET REMOVE UNION
    """.split()
)

# Longest first so that "<=" wins over "<".
_SYMBOLS = ("<>", "!=", "<=", ">=", "(", ")", "[", "]", "{", "}", ":", ",", ".",
            ";", "-", "+", "*", "/", "%", "=", "<", ">", "|")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT KW STRING INT FLOAT SYM EOF
    value: object
    text: str
    line: int
    col: int
    offset: int

    def describe(self) -> str:
        if self.kind == "EOF":
            return "end of input"
        return "'" + self.text + "'"


_ESCAPES = {"\\": "\\", "'": "'", '"': '"', "n": "\n", "t": "\t", "r": "\r"}


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    i, line, line_start = 0, 1, 0
    n = len(text)

    def pos(at: int):
        return line, at - line_start + 1

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line, line_start = line + 1, i
            continue
        if ch in " \t\r\f\v":
            i += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start = i
        ln, col = pos(i)
        if ch.isalpha() or ch == "_":
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            word = text[start:i]
            upper = word.upper()
            if upper in KEYWORDS:
                tokens.append(Token("KW", upper, word, ln, col, start))
            else:
                tokens.append(Token("IDENT", word, word, ln, col, start))
            continue
        if ch == "`":
            j = text.find("`", i + 1)
            if j < 0 or "\n" in text[i + 1 : j]:
                raise CypherSyntaxError(ln, col, ["'`'"], "end of input")
            name = text[i + 1 : j]
            if not name:
                raise CypherSyntaxError(ln, col, ["identifier"], "'``'")
            i = j + 1
            tokens.append(Token("IDENT", name, text[start:i], ln, col, start))
            continue
        if ch.isdigit():
            while i < n and text[i].isdigit():
                i += 1
            is_float = False
            if i + 1 < n and text[i] == "." and text[i + 1].isdigit():
                is_float = True
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
            if i < n and text[i] in "eE":
                j = i + 1
                if j < n and text[j] in "+-":
                    j += 1
                if j < n and text[j].isdigit():
                    is_float = True
                    i = j
                    while i < n and text[i].isdigit():
                        i += 1
            if i < n and (text[i].isalpha() or text[i] == "_"):
                ln2, col2 = pos(i)
                raise CypherSyntaxError(ln2, col2, ["operator"], "'" + text[i] + "'")
            lit = text[start:i]
            if is_float:
                tokens.append(Token("FLOAT", float(lit), lit, ln, col, start))
            else:
                tokens.append(Token("INT", int(lit), lit, ln, col, start))
            continue
        if ch in "'\"":
            quote = ch
            i += 1
            buf = []
            while True:
                if i >= n:
                    raise CypherSyntaxError(ln, col, ["closing quote"], "end of input")
                c = text[i]
                if c == quote:
                    i += 1
                    break
                if c == "\\":
                    if i + 1 >= n:
                        raise CypherSyntaxError(ln, col, ["closing quote"], "end of input")
                    esc = text[i + 1]
                    if esc not in _ESCAPES:
                        l2, c2 = pos(i)
                        raise CypherSyntaxError(l2, c2, ["escape sequence"], "'\\" + esc + "'")
                    buf.append(_ESCAPES[esc])
                    i += 2
                    continue
                if c == "\n":
                    line, line_start = line + 1, i + 1
                buf.append(c)
                i += 1
            tokens.append(Token("STRING", "".join(buf), text[start:i], ln, col, start))
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                i += len(sym)
                value = "<>" if sym == "!=" else sym
                tokens.append(Token("SYM", value, sym, ln, col, start))
                break
        else:
            raise CypherSyntaxError(ln, col, ["token"], "'" + ch + "'")
    ln, col = pos(n)
    tokens.append(Token("EOF", None, "", ln, col, n))
    return tokens
