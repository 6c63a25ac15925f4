"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports and ``ASSETGRAPH_NUMBA`` is not
set to ``0``; both paths implement identical contracts and are tested
against each other.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _numpy

BACKENDS = {"numpy": _numpy}

try:  # pragma: no cover - depends on the environment
    from . import _numba

    BACKENDS["numba"] = _numba
except ImportError:  # pragma: no cover
    _numba = None


def _select() -> str:
    flag = os.environ.get("ASSETGRAPH_NUMBA", "1").strip().lower()
    if flag in ("0", "false", "no", "off") or "numba" not in BACKENDS:
        return "numpy"
    return "numba"


ACTIVE = _select()


def get(name: str | None = None) -> ModuleType:
    """Kernel module for ``name`` (default: the active backend)."""
    name = name or ACTIVE
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable kernel backend {name!r}") from None


_active = get()
half_sq_distances = _active.half_sq_distances
pagerank_power = _active.pagerank_power
nondominated_ranks = _active.nondominated_ranks
crowding_distance = _active.crowding_distance

__all__ = [
    "ACTIVE",
    "BACKENDS",
    "crowding_distance",
    "get",
    "half_sq_distances",
    "nondominated_ranks",
    "pagerank_power",
]
