"""Scalar property values: typing, comparison and ISO-8601 timestamps.

Property values are plain Python objects: ``str``, ``int``, ``float``,
``bool`` and timezone-aware ``datetime`` (UTC, whole seconds). Lists of
floats are also accepted so that embeddings can live on a node; they are
never indexed and never compared by the query engine.
"""

from __future__ import annotations

import math
import re
from datetime import datetime, timezone
from typing import Any, Union

Scalar = Union[str, int, float, bool, datetime]

_ISO_RE = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})"
    r"(?:[T ](\d{2}):(\d{2})(?::(\d{2})(?:\.\d+)?)?)?"
    r"(Z|[+-]\d{2}:?\d{2})?$"
)


def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 date or datetime into a UTC datetime (seconds).

    Naive inputs are taken to be UTC. Raises ``ValueError`` on bad input.
    """
    text = text.strip()
    m = _ISO_RE.match(text)
    if not m:
        raise ValueError(f"not an ISO-8601 timestamp: {text!r}")
    y, mo, d, hh, mm, ss, tz = m.groups()
    dt = datetime(int(y), int(mo), int(d), int(hh or 0), int(mm or 0), int(ss or 0))
    if tz and tz != "Z":
        sign = 1 if tz[0] == "+" else -1
        digits = tz[1:].replace(":", "")
        offset = sign * (int(digits[:2]) * 3600 + int(digits[2:]) * 60)
        dt = datetime.fromtimestamp(
            dt.replace(tzinfo=timezone.utc).timestamp() - offset, tz=timezone.utc
        )
        return dt
    return dt.replace(tzinfo=timezone.utc)


def format_timestamp(dt: datetime) -> str:
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc)
    return dt.replace(tzinfo=None, microsecond=0).isoformat() + "Z"


def normalize_value(value: Any) -> Any:
    """Coerce a user-supplied property value into the stored representation."""
    if isinstance(value, bool) or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            raise ValueError("non-finite float property values are not supported")
        return value
    if isinstance(value, datetime):
        if value.tzinfo is None:
            value = value.replace(tzinfo=timezone.utc)
        return value.astimezone(timezone.utc).replace(microsecond=0)
    if isinstance(value, (list, tuple)):
        out = []
        for v in value:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise TypeError("list properties must contain numbers only")
            out.append(float(v))
        return out
    if hasattr(value, "tolist"):  # numpy arrays and scalars
        return normalize_value(value.tolist())
    raise TypeError(f"unsupported property value type: {type(value).__name__}")


def is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def index_key(value: Any):
    """Hashable key under which equal values collide (1 == 1.0, True != 1)."""
    if isinstance(value, bool):
        return ("b", value)
    if is_number(value):
        return ("n", value)
    if isinstance(value, str):
        return ("s", value)
    if isinstance(value, datetime):
        return ("t", value)
    return None


def values_equal(a: Any, b: Any) -> bool | None:
    """Cypher equality. ``None`` means null (either side missing)."""
    if a is None or b is None:
        return None
    if isinstance(a, str) and isinstance(b, datetime):
        a, b = b, a
    if isinstance(a, datetime) and isinstance(b, str):
        try:
            b = parse_timestamp(b)
        except ValueError:
            return False
    ka, kb = index_key(a), index_key(b)
    if ka is None or kb is None:
        return False
    return ka == kb


def compare_values(a: Any, b: Any) -> int | None:
    """Three-way compare for ``<``-style operators.

    Returns ``None`` for null operands and also for type mismatches, which
    the caller turns into false.
    """
    if a is None or b is None:
        return None
    if isinstance(a, datetime) and isinstance(b, str):
        try:
            b = parse_timestamp(b)
        except ValueError:
            return None
    elif isinstance(a, str) and isinstance(b, datetime):
        try:
            a = parse_timestamp(a)
        except ValueError:
            return None
    if not (
        (is_number(a) and is_number(b))
        or (isinstance(a, bool) and isinstance(b, bool))
        or (isinstance(a, str) and isinstance(b, str))
        or (isinstance(a, datetime) and isinstance(b, datetime))
    ):
        return None
    if a < b:
        return -1
    if a > b:
        return 1
    return 0


# Global sort order across types for ORDER BY / min / max.
_TYPE_RANK = {"b": 1, "n": 2, "s": 3, "t": 4}


def sort_key(value: Any):
    """Total order key; nulls sort after every value."""
    if value is None:
        return (9, 0)
    k = index_key(value)
    if k is None:
        # nodes, edges, lists
        ident = getattr(value, "seq", None)
        if ident is not None:
            return (6, ident)
        return (7, repr(value))
    return (_TYPE_RANK[k[0]], k[1])


def render_value(value: Any) -> str:
    """Human rendering used in tables and answer text."""
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, datetime):
        return format_timestamp(value)
    if isinstance(value, float):
        if value.is_integer() and abs(value) < 1e15:
            return f"{value:.1f}"
        return f"{value:.6g}"
    return str(value)
