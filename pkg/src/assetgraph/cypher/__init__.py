"""OpenCypher subset: parse, validate, plan and execute against a GraphStore."""

from .ast import CreateQuery, MatchQuery, QueryAst
from .errors import CypherError, CypherExecutionError, CypherSyntaxError, CypherValidationError
from .executor import CreateResult, ResultTable, execute, execute_create, run
from .parser import parse
from .planner import Plan, plan
from .render import query as render
from .validate import validate

__all__ = [
    "CreateQuery",
    "CreateResult",
    "CypherError",
    "CypherExecutionError",
    "CypherSyntaxError",
    "CypherValidationError",
    "MatchQuery",
    "Plan",
    "QueryAst",
    "ResultTable",
    "execute",
    "execute_create",
    "parse",
    "plan",
    "render",
    "run",
    "validate",
]
