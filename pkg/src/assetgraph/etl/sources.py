"""Readers for the source files feeding the build.

Readers never raise on a bad record; they yield it with a reason so the
pipeline can list it as rejected. An unreadable or structurally broken
file raises :class:`EtlFatalError` carrying the file and line.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import yaml

PathLike = Union[str, Path]

HIERARCHY_COLUMNS = ("kind", "id", "name", "parent", "isa95_level", "iso14224_class")
EVENT_COLUMNS = ("event_id", "timestamp", "equipment_id", "kind")
READING_COLUMNS = ("reading_id", "sensor_id", "timestamp", "value")

BUNDLE_FILES = {
    "hierarchy": "hierarchy.csv",
    "sensors": "sensors.json",
    "fmsr": "fmsr.yaml",
    "events": "events.csv",
    "topology": "topology.yaml",
    "rules": "rules.yaml",
    "readings": "readings.csv",
}


class EtlFatalError(Exception):
    def __init__(self, path: str, line: int, message: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


@dataclass
class SourceBundle:
    hierarchy: Optional[Path] = None
    sensors: Optional[Path] = None
    fmsr: Optional[Path] = None
    events: Optional[Path] = None
    topology: Optional[Path] = None
    rules: Optional[Path] = None
    readings: Optional[Path] = None

    @classmethod
    def from_dir(cls, directory: PathLike) -> "SourceBundle":
        """Bundle of the conventionally named files present in ``directory``."""
        d = Path(directory)
        found = {k: d / name for k, name in BUNDLE_FILES.items() if (d / name).exists()}
        return cls(**found)

    def paths(self) -> Dict[str, Path]:
        return {k: Path(getattr(self, k)) for k in BUNDLE_FILES if getattr(self, k) is not None}


@dataclass
class Record:
    """One parsed source record with its origin for error reporting."""

    source: str
    line: int
    data: Dict[str, Any] = field(default_factory=dict)


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise EtlFatalError(str(path), 0, f"cannot read file: {exc}") from None


def read_csv(path: PathLike, required: Sequence[str]) -> Iterator[Record]:
    p = Path(path)
    text = _read_text(p)
    reader = csv.DictReader(text.splitlines(keepends=True), strict=True)
    try:
        header = reader.fieldnames or []
    except csv.Error as exc:
        raise EtlFatalError(str(p), 1, f"bad CSV header: {exc}") from None
    if not header and text.strip() == "":
        return
    missing = [c for c in required if c not in header]
    if missing:
        raise EtlFatalError(str(p), 1, f"missing columns: {', '.join(missing)}")
    try:
        for row in reader:
            data = {k: (v.strip() if isinstance(v, str) else v) for k, v in row.items() if k is not None}
            if None in row:
                data["__extra__"] = row[None]
            yield Record(str(p), reader.line_num, data)
    except csv.Error as exc:
        raise EtlFatalError(str(p), reader.line_num, f"malformed CSV: {exc}") from None


def read_json_array(path: PathLike) -> Iterator[Record]:
    p = Path(path)
    text = _read_text(p)
    try:
        data = json.loads(text) if text.strip() else []
    except json.JSONDecodeError as exc:
        raise EtlFatalError(str(p), exc.lineno, exc.msg) from None
    if not isinstance(data, list):
        raise EtlFatalError(str(p), 1, "expected a JSON array of objects")
    for i, item in enumerate(data):
        yield Record(str(p), i + 1, item if isinstance(item, dict) else {"__invalid__": item})


def read_yaml_list(path: PathLike) -> Iterator[Record]:
    p = Path(path)
    text = _read_text(p)
    try:
        nodes = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else 0
        raise EtlFatalError(str(p), line, f"invalid YAML: {exc}") from None
    if data is None:
        return
    if not isinstance(data, list):
        raise EtlFatalError(str(p), 1, "expected a YAML list of mappings")
    lines: List[int] = []
    if nodes is not None and hasattr(nodes, "value"):
        lines = [n.start_mark.line + 1 for n in nodes.value]
    for i, item in enumerate(data):
        line = lines[i] if i < len(lines) else i + 1
        yield Record(str(p), line, item if isinstance(item, dict) else {"__invalid__": item})


def as_float(value: Any) -> Tuple[Optional[float], Optional[str]]:
    if value is None or value == "":
        return None, None
    try:
        f = float(value)
    except (TypeError, ValueError):
        return None, f"not a number: {value!r}"
    if f != f or f in (float("inf"), float("-inf")):
        return None, f"not a finite number: {value!r}"
    return f, None
