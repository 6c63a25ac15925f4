from __future__ import annotations

from typing import Iterable


class CypherError(Exception):
    """Base class; ``str(err)`` is a one-line message safe to show an LLM."""

    line = 0
    col = 0


def _describe_expected(expected: Iterable[str]) -> str:
    items = sorted(set(expected))
    return " | ".join(items) if items else "token"


class CypherSyntaxError(CypherError):
    def __init__(self, line: int, col: int, expected: Iterable[str], found: str):
        self.line = line
        self.col = col
        self.expected = sorted(set(expected))
        self.found = found
        super().__init__(
            f"syntax error at {line}:{col}: expected {_describe_expected(self.expected)}, found {found}"
        )


class CypherValidationError(CypherError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        self.detail = message
        super().__init__(f"validation error at {line}:{col}: {message}")


class CypherExecutionError(CypherError):
    def __init__(self, message: str):
        self.detail = message
        super().__init__(f"execution error: {message}")
