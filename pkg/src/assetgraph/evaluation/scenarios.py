"""Scenario files: JSON lines of ``{id, category, question, expects, deterministic}``."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

EXPECT_KINDS = ("exact", "set", "rubric", "check")

CUSTOM_CATEGORIES = (
    "multi_hop_dependency",
    "cross_asset_correlation",
    "failure_similarity",
    "criticality",
    "maintenance_optimization",
    "root_cause",
    "temporal",
)
BASE_CATEGORIES = ("iot", "fmsr", "work_order", "event_count", "rule_logic", "phm", "failure_modes", "gak")


class ScenarioError(ValueError):
    def __init__(self, index: int, message: str):
        super().__init__(f"scenario record {index}: {message}")
        self.index = index


@dataclass(frozen=True)
class Expectation:
    kind: str
    value: Any = None
    values: Optional[Tuple[Any, ...]] = None
    rubric: Optional[str] = None
    check: Optional[str] = None
    tolerance: float = 1e-6

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"kind": self.kind}
        if self.kind == "exact":
            out["value"] = self.value
        elif self.kind == "set":
            out["values"] = list(self.values or ())
        elif self.kind == "rubric":
            out["rubric"] = self.rubric
        else:
            out["check"] = self.check
        if self.tolerance != 1e-6:
            out["tolerance"] = self.tolerance
        return out


@dataclass(frozen=True)
class Scenario:
    id: str
    category: str
    question: str
    expects: Expectation
    deterministic: bool = True
    tags: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def needs_judge(self) -> bool:
        return self.expects.kind == "rubric"

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "id": self.id,
            "category": self.category,
            "question": self.question,
            "expects": self.expects.to_dict(),
            "deterministic": self.deterministic,
        }
        if self.tags:
            out["tags"] = list(self.tags)
        return out


def parse_scenario(record: Any, index: int = 0) -> Scenario:
    if not isinstance(record, dict):
        raise ScenarioError(index, "record must be a JSON object")
    for key in ("id", "category", "question"):
        v = record.get(key)
        if not isinstance(v, str) or not v.strip():
            raise ScenarioError(index, f"'{key}' must be a non-empty string")
    exp = record.get("expects")
    if not isinstance(exp, dict):
        raise ScenarioError(index, "'expects' must be an object")
    kind = exp.get("kind")
    if kind not in EXPECT_KINDS:
        raise ScenarioError(index, f"expects.kind must be one of {', '.join(EXPECT_KINDS)}")
    tol = exp.get("tolerance", 1e-6)
    if not isinstance(tol, (int, float)) or isinstance(tol, bool) or tol < 0:
        raise ScenarioError(index, "expects.tolerance must be a non-negative number")
    if kind == "exact":
        if "value" not in exp:
            raise ScenarioError(index, "exact expectation needs 'value'")
        e = Expectation(kind, value=exp["value"], tolerance=float(tol))
    elif kind == "set":
        vals = exp.get("values")
        if not isinstance(vals, list):
            raise ScenarioError(index, "set expectation needs a 'values' list")
        e = Expectation(kind, values=tuple(vals), tolerance=float(tol))
    elif kind == "rubric":
        rub = exp.get("rubric")
        if not isinstance(rub, str) or not rub.strip():
            raise ScenarioError(index, "rubric expectation needs non-empty 'rubric' text")
        e = Expectation(kind, rubric=rub)
    else:
        chk = exp.get("check")
        if not isinstance(chk, str) or not chk.strip():
            raise ScenarioError(index, "check expectation needs a 'check' name")
        e = Expectation(kind, check=chk)
    det = record.get("deterministic", True)
    if not isinstance(det, bool):
        raise ScenarioError(index, "'deterministic' must be a boolean")
    tags = record.get("tags", [])
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise ScenarioError(index, "'tags' must be a list of strings")
    return Scenario(record["id"].strip(), record["category"].strip(), record["question"].strip(), e, det, tuple(tags))


def loads_scenarios(text: str) -> List[Scenario]:
    out: List[Scenario] = []
    seen = set()
    index = 0
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        index += 1
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ScenarioError(index, f"invalid JSON: {exc.msg}") from None
        sc = parse_scenario(record, index)
        if sc.id in seen:
            raise ScenarioError(index, f"duplicate id {sc.id!r}")
        seen.add(sc.id)
        out.append(sc)
    return out


def load_scenarios(path: Union[str, Path]) -> List[Scenario]:
    return loads_scenarios(Path(path).read_text(encoding="utf-8"))


def dumps_scenarios(scenarios: List[Scenario]) -> str:
    return "".join(json.dumps(s.to_dict(), sort_keys=True) + "\n" for s in scenarios)


def custom40_path() -> Path:
    return Path(__file__).resolve().parent.parent / "data" / "custom40.jsonl"
