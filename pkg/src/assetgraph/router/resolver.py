"""Equipment, failure-mode and time mentions in question text.

Equipment aliases come from a lookup table built from the graph: the
identifier (``CWC04006``), the name (``Chiller 6``) and its spelling
variants (``Chiller-6``, ``chiller6``, ``CH06``, ``CH6``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Dict, List, Optional, Sequence, Tuple

from ..gak import canonicalize, singular
from ..graph.store import GraphStore

_ID = re.compile(r"\b[A-Z]{3}\d{5}\b")
_NAMED = re.compile(r"^([A-Za-z]+)\s*[- ]?\s*0*(\d+)$")


def _variants(name: str) -> List[str]:
    out = [name.lower()]
    m = _NAMED.match(name.strip())
    if m:
        word, num = m.group(1).lower(), int(m.group(2))
        for sep in (" ", "-", "", " #", " no. "):
            out.append(f"{word}{sep}{num}")
            out.append(f"{word}{sep}{num:02d}")
        if len(word) > 2:
            out.append(f"{word[:2]}{num:02d}")
            out.append(f"{word[:2]}{num}")
            out.append(f"{word[:2]}-{num:02d}")
    return list(dict.fromkeys(out))


@dataclass
class Mention:
    node_id: str
    start: int
    text: str


class Resolver:
    """Lookup tables over the current graph; rebuild after the graph changes."""

    def __init__(self, graph: GraphStore):
        self.graph = graph
        self.version = (graph.node_count, graph.edge_count)
        self.by_id: Dict[str, str] = {}
        self.aliases: Dict[str, str] = {}
        self.types: Dict[str, List[str]] = {}
        for nid in graph.nodes_by_label("Equipment"):
            n = graph.node(nid)
            eid = n.get("equipment_id")
            if isinstance(eid, str):
                self.by_id[eid.upper()] = nid
                self.aliases.setdefault(eid.lower(), nid)
            name = n.get("name")
            if isinstance(name, str):
                for v in _variants(name):
                    self.aliases.setdefault(v, nid)
            et = n.get("equipment_type")
            if isinstance(et, str):
                self.types.setdefault(canonicalize(et), []).append(nid)
        self.failure_modes: Dict[str, str] = {}
        for nid in graph.nodes_by_label("FailureMode"):
            name = graph.node(nid).get("name")
            if isinstance(name, str):
                self.failure_modes.setdefault(name.lower(), nid)
        self._alias_re = self._compile(self.aliases)
        self._fm_re = self._compile(self.failure_modes)

    @staticmethod
    def _compile(table: Dict[str, str]) -> Optional[re.Pattern]:
        if not table:
            return None
        keys = sorted(table, key=lambda k: (-len(k), k))
        return re.compile(r"(?<![\w-])(" + "|".join(re.escape(k) for k in keys) + r")(?![\w-])", re.I)

    def stale(self) -> bool:
        return self.version != (self.graph.node_count, self.graph.edge_count)

    def equipment(self, text: str) -> List[Mention]:
        """Equipment mentions in order of appearance, without repeats."""
        found: List[Mention] = []
        taken: List[Tuple[int, int]] = []
        for m in _ID.finditer(text):
            nid = self.by_id.get(m.group(0).upper())
            if nid is not None:
                found.append(Mention(nid, m.start(), m.group(0)))
                taken.append(m.span())
        if self._alias_re is not None:
            for m in self._alias_re.finditer(text):
                if any(a < m.end() and m.start() < b for a, b in taken):
                    continue
                found.append(Mention(self.aliases[m.group(1).lower()], m.start(), m.group(1)))
        found.sort(key=lambda x: x.start)
        seen = set()
        out = []
        for f in found:
            if f.node_id not in seen:
                seen.add(f.node_id)
                out.append(f)
        return out

    def unknown_ids(self, text: str) -> List[str]:
        """Identifier-shaped tokens that name no equipment in the graph."""
        return [m.group(0).upper() for m in _ID.finditer(text) if m.group(0).upper() not in self.by_id]

    def failure_mode_mentions(self, text: str) -> List[Mention]:
        if self._fm_re is None:
            return []
        out, seen = [], set()
        for m in self._fm_re.finditer(text):
            nid = self.failure_modes[m.group(1).lower()]
            if nid not in seen:
                seen.add(nid)
                out.append(Mention(nid, m.start(), m.group(1)))
        return out

    def type_mentions(self, text: str) -> List[Tuple[str, int]]:
        """Equipment types named in the text (canonical key, position)."""
        words = re.finditer(r"[A-Za-z][A-Za-z\-]*", text)
        toks = [(singular(m.group(0).lower()), m.start()) for m in words]
        out: List[Tuple[str, int]] = []
        for key in sorted(self.types, key=lambda k: (-len(k), k)):
            parts = key.split()
            for i in range(len(toks) - len(parts) + 1):
                if [t for t, _ in toks[i : i + len(parts)]] == parts:
                    out.append((key, toks[i][1]))
        for short, key in (("ahu", "air handling unit"),):
            if key in self.types:
                for t, pos in toks:
                    if t in (short, short + "s") and (key, pos) not in out:
                        out.append((key, pos))
        out.sort(key=lambda t: t[1])
        return out


_YEAR = re.compile(r"\b(?:in|during|for|of)\s+((?:19|20)\d{2})\b")
_RANGE = re.compile(r"\b(?:between|from)\s+((?:19|20)\d{2})\s+(?:and|to|through|-)\s+((?:19|20)\d{2})\b")
_SINCE = re.compile(r"\bsince\s+((?:19|20)\d{2})\b")
_BEFORE = re.compile(r"\bbefore\s+((?:19|20)\d{2})\b")


def year_window(text: str) -> Optional[Tuple[Optional[datetime], Optional[datetime]]]:
    """[start, end) window from phrases like 'in 2019' or 'between 2018 and 2020' (inclusive years)."""
    m = _RANGE.search(text)
    if m:
        a, b = sorted((int(m.group(1)), int(m.group(2))))
        return _jan1(a), _jan1(b + 1)
    m = _YEAR.search(text)
    if m:
        y = int(m.group(1))
        return _jan1(y), _jan1(y + 1)
    start = _jan1(int(_SINCE.search(text).group(1))) if _SINCE.search(text) else None
    end = _jan1(int(_BEFORE.search(text).group(1))) if _BEFORE.search(text) else None
    if start or end:
        return start, end
    return None


def _jan1(y: int) -> datetime:
    return datetime(y, 1, 1, tzinfo=timezone.utc)


def top_n(text: str, default: Optional[int] = None) -> Optional[int]:
    m = re.search(r"\btop\s+(\d+)\b|\b(\d+)\s+most\b", text, re.I)
    if m:
        return int(m.group(1) or m.group(2))
    return default


def hours_phrase(text: str) -> Optional[float]:
    m = re.search(r"\b(\d+)\s*(hours?|h|days?)\b", text, re.I)
    if not m:
        return None
    n = float(m.group(1))
    return n * 24.0 if m.group(2).lower().startswith("d") else n


def names(graph: GraphStore, ids: Sequence[str]) -> List[str]:
    return [str(graph.node(i).get("name", i)) for i in ids]
