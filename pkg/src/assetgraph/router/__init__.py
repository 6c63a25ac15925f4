"""Question routing: deterministic handlers, knowledge-gap enrichment and NLQ."""

from .handlers import Context, ExtractionError, HandlerResult, HandlerSpec, UnknownEquipment, handler_catalog
from .resolver import Resolver, year_window
from .router import (
    DETERMINISTIC,
    GAK,
    NLQ,
    REFUSED,
    TIERS,
    Answer,
    RouteDecision,
    Router,
    Workspace,
    to_jsonable,
)

__all__ = [
    "Answer",
    "Context",
    "DETERMINISTIC",
    "ExtractionError",
    "GAK",
    "HandlerResult",
    "HandlerSpec",
    "NLQ",
    "REFUSED",
    "Resolver",
    "RouteDecision",
    "Router",
    "TIERS",
    "UnknownEquipment",
    "Workspace",
    "handler_catalog",
    "to_jsonable",
    "year_window",
]
