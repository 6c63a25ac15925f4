"""Mechanical 8-dimension scoring.

Correctness and completeness come from the scenario's expectation;
the other six dimensions read the answer's tier, trace, latency and
payload. Only ``rubric`` expectations need a judge; without one the card
is flagged ``judge_required`` and kept out of aggregates.
"""

from __future__ import annotations

import json
import math
import os
import re
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Protocol, Set, Tuple

from ..router import Answer, to_jsonable
from .scenarios import Scenario

DIMENSIONS = (
    "correctness",
    "completeness",
    "relevance",
    "tool_usage",
    "efficiency",
    "safety",
    "graph_utilization",
    "semantic_precision",
)

DEFAULT_WEIGHTS: Dict[str, float] = {
    "correctness": 0.25,
    "completeness": 0.15,
    "relevance": 0.10,
    "tool_usage": 0.10,
    "efficiency": 0.10,
    "safety": 0.10,
    "graph_utilization": 0.10,
    "semantic_precision": 0.10,
}

CATEGORY_WEIGHTS: Dict[str, Dict[str, float]] = {
    "failure_similarity": {
        "correctness": 0.15,
        "completeness": 0.10,
        "relevance": 0.10,
        "tool_usage": 0.10,
        "efficiency": 0.10,
        "safety": 0.10,
        "graph_utilization": 0.10,
        "semantic_precision": 0.25,
    },
}

LATENCY_BANDS: Tuple[Tuple[float, float], ...] = ((150.0, 1.0), (2000.0, 0.7), (15000.0, 0.4))
LATENCY_FLOOR = 0.1
PASS_THRESHOLD = 0.7


def weights_for(category: str) -> Dict[str, float]:
    w = dict(CATEGORY_WEIGHTS.get(category, DEFAULT_WEIGHTS))
    if abs(math.fsum(w.values()) - 1.0) > 1e-9 or set(w) != set(DIMENSIONS):
        raise ValueError(f"weights for {category!r} must cover the 8 dimensions and sum to 1")
    return w


def efficiency(latency_ms: float) -> float:
    for limit, score in LATENCY_BANDS:
        if latency_ms <= limit:
            return score
    return LATENCY_FLOOR


@dataclass
class ScoreCard:
    scenario_id: str
    category: str
    scores: Dict[str, float]
    weights: Dict[str, float]
    total: float
    passed: bool
    judge_required: bool = False
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario_id": self.scenario_id,
            "category": self.category,
            "scores": dict(self.scores),
            "weights": dict(self.weights),
            "total": self.total,
            "passed": self.passed,
            "judge_required": self.judge_required,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ScoreCard":
        return cls(d["scenario_id"], d["category"], dict(d["scores"]), dict(d["weights"]), d["total"],
                   d["passed"], d.get("judge_required", False), list(d.get("notes", [])))


class Judge(Protocol):
    def score(self, scenario: Scenario, answer: Answer) -> float:
        ...


class HttpJudge:
    """POSTs ``{question, rubric, answer}`` and expects ``{"score": float in [0, 1]}``."""

    def __init__(self, endpoint: Optional[str] = None, timeout: float = 60.0):
        self.endpoint = endpoint or os.environ.get("JUDGE_ENDPOINT")
        if not self.endpoint:
            raise ValueError("judge endpoint not configured (pass one or set JUDGE_ENDPOINT)")
        self.timeout = timeout

    def score(self, scenario: Scenario, answer: Answer) -> float:
        body = json.dumps({"question": scenario.question, "rubric": scenario.expects.rubric,
                           "answer": answer.text}).encode("utf-8")
        req = urllib.request.Request(self.endpoint, body, {"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                data = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise RuntimeError(f"judge request failed: {exc}") from exc
        s = data.get("score") if isinstance(data, dict) else None
        if not isinstance(s, (int, float)) or not 0.0 <= s <= 1.0:
            raise RuntimeError(f"judge returned an invalid score: {data!r}")
        return float(s)


# -- value comparison --------------------------------------------------------


def _norm(v: Any) -> Any:
    if isinstance(v, str):
        return v.strip().casefold()
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, (list, tuple)):
        return tuple(_norm(x) for x in v)
    if isinstance(v, dict):
        return tuple(sorted((str(k), _norm(x)) for k, x in v.items()))
    return v


def values_match(expected: Any, got: Any, tol: float = 1e-6) -> bool:
    if isinstance(expected, bool) or isinstance(got, bool):
        return expected is got
    if isinstance(expected, (int, float)) and isinstance(got, (int, float)):
        return abs(float(expected) - float(got)) <= tol * max(1.0, abs(float(expected)))
    if isinstance(expected, str) and isinstance(got, str):
        return expected.strip().casefold() == got.strip().casefold()
    if isinstance(expected, (list, tuple)) and isinstance(got, (list, tuple)):
        return len(expected) == len(got) and all(values_match(a, b, tol) for a, b in zip(expected, got))
    if isinstance(expected, dict) and isinstance(got, dict):
        return set(expected) == set(got) and all(values_match(expected[k], got[k], tol) for k in expected)
    return expected is None and got is None


def _as_set(v: Any) -> Set[Any]:
    if v is None:
        return set()
    if isinstance(v, (list, tuple, set, frozenset)):
        return {_norm(x) for x in v}
    return {_norm(v)}


# -- structural checks -------------------------------------------------------


def _check_pareto_front(answer: Answer) -> Tuple[bool, str]:
    p = answer.payload
    plans = p.get("plans") or []
    if not p.get("feasible") or not plans:
        return False, "no feasible plans"
    wos = {w["id"]: w for w in p.get("work_orders", [])}
    horizon = p.get("horizon_hours")
    objs = []
    for pl in plans:
        starts = pl["starts"]
        if set(starts) != set(wos):
            return False, "plan does not schedule every work order"
        for wid, s in starts.items():
            if s < 0 or (horizon is not None and s + wos[wid]["duration"] > horizon):
                return False, f"{wid} outside the horizon"
        ids = sorted(starts)
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                if wos[a]["equipment"] == wos[b]["equipment"]:
                    a0, a1 = starts[a], starts[a] + wos[a]["duration"]
                    b0, b1 = starts[b], starts[b] + wos[b]["duration"]
                    if a0 < b1 and b0 < a1:
                        return False, f"{a} and {b} overlap on {wos[a]['equipment']}"
        objs.append((pl["downtime"], pl["cost"]))
    for i, a in enumerate(objs):
        for j, b in enumerate(objs):
            if i != j and b[0] <= a[0] and b[1] <= a[1] and b != a:
                return False, "front contains a dominated plan"
    return True, f"{len(plans)} feasible, mutually non-dominated plans"


def _check_ranking(answer: Answer) -> Tuple[bool, str]:
    rk = answer.payload.get("ranking") or []
    scores = [r["score"] for r in rk]
    if not scores:
        return False, "empty ranking"
    if any(a < b for a, b in zip(scores, scores[1:])):
        return False, "scores not descending"
    if any(s < 0 for s in scores) or math.fsum(scores) > 1.0 + 1e-9:
        return False, "scores are not a probability vector"
    return True, "descending PageRank scores"


def _check_nonempty(answer: Answer) -> Tuple[bool, str]:
    ok = not answer.refused and answer.value not in (None, [], {}, "")
    return ok, "non-empty answer" if ok else "empty or refused answer"


def _check_refused(answer: Answer) -> Tuple[bool, str]:
    return answer.refused, "refused" if answer.refused else "answered"


def _check_enriched(answer: Answer) -> Tuple[bool, str]:
    ok = answer.enrichment_id is not None and not answer.refused
    return ok, "answered from an enrichment record" if ok else "no enrichment record linked"


CHECKS: Dict[str, Callable[[Answer], Tuple[bool, str]]] = {
    "pareto_front": _check_pareto_front,
    "descending_ranking": _check_ranking,
    "nonempty": _check_nonempty,
    "refused": _check_refused,
    "enriched": _check_enriched,
}


# -- fabrication audit -------------------------------------------------------

_TIMESTAMP = re.compile(r"\d{4}-\d{2}-\d{2}(?:[T ]\d{2}:\d{2}(?::\d{2}(?:\.\d+)?)?(?:Z|[+-]\d{2}:?\d{2})?)?")
_IDENT = re.compile(r"[A-Za-z_][\w-]*\d[\w-]*|\d+[A-Za-z_][\w-]*")
_NUMBER = re.compile(r"-?\d+(?:\.\d+)?")


def numbers_in(text: str) -> List[Tuple[float, int]]:
    """(value, decimals) for each standalone number, ignoring timestamps and identifiers."""
    text = _TIMESTAMP.sub(" ", text)
    text = _IDENT.sub(" ", text)
    out = []
    for m in _NUMBER.finditer(text):
        tok = m.group(0)
        dec = len(tok.split(".")[1]) if "." in tok else 0
        out.append((float(tok), dec))
    return out


def _harvest(value: Any, acc: Set[float], lengths: Set[int]) -> None:
    if isinstance(value, bool) or value is None:
        return
    if isinstance(value, (int, float)):
        if math.isfinite(float(value)):
            acc.add(float(value))
    elif isinstance(value, str):
        acc.update(v for v, _ in numbers_in(value))
        # identifiers carry numbers too (e.g. "Chiller 6", "WO-2024-0042")
        acc.update(float(x) for x in re.findall(r"\d+", value))
    elif isinstance(value, dict):
        lengths.add(len(value))
        for k, v in value.items():
            _harvest(k, acc, lengths)
            _harvest(v, acc, lengths)
    elif isinstance(value, (list, tuple)):
        lengths.add(len(value))
        for v in value:
            _harvest(v, acc, lengths)


def unsupported_numbers(answer: Answer) -> List[str]:
    """Numbers in the answer text that no payload value, count or question token supports."""
    allowed: Set[float] = set()
    lengths: Set[int] = set()
    _harvest(to_jsonable(answer.payload), allowed, lengths)
    _harvest(to_jsonable(answer.value), allowed, lengths)
    _harvest(answer.question, allowed, lengths)
    derived = set(allowed)
    for a in allowed:
        derived.update((a / 24.0, a * 100.0, a / 1000.0))
    for n in lengths:
        derived.update(float(i) for i in range(0, n + 1))
    bad = []
    for v, dec in numbers_in(answer.text):
        half = 0.5 * 10.0 ** (-dec) + 1e-9
        if not any(abs(v - a) <= half for a in derived):
            bad.append(f"{v:.{dec}f}")
    return bad


# -- scoring -----------------------------------------------------------------


def _graph_utilization(trace: Iterable[str]) -> float:
    best = 0.0
    for t in trace:
        if t.startswith(("algorithm:", "vector:")) or (t.startswith("plan:") and "IndexSeek" in t):
            return 1.0
        if t.startswith(("plan:", "traverse:", "cypher:")):
            best = max(best, 0.75)
    return best


def score_answer(
    scenario: Scenario,
    answer: Answer,
    judge: Optional[Judge] = None,
    threshold: float = PASS_THRESHOLD,
) -> ScoreCard:
    """Pure function of (scenario, answer, weights) unless a judge is consulted."""
    exp = scenario.expects
    notes: List[str] = []
    judge_required = False
    if exp.kind == "exact":
        ok = values_match(exp.value, to_jsonable(answer.value), exp.tolerance)
        correctness = completeness = 1.0 if ok else 0.0
        if not ok:
            notes.append(f"expected {exp.value!r}, got {to_jsonable(answer.value)!r}")
    elif exp.kind == "set":
        want, got = _as_set(list(exp.values or ())), _as_set(to_jsonable(answer.value))
        hit = len(want & got)
        completeness = hit / len(want) if want else (1.0 if not got else 0.0)
        correctness = hit / len(got) if got else (1.0 if not want else 0.0)
        if want != got:
            notes.append(f"missing {sorted(map(str, want - got))}, extra {sorted(map(str, got - want))}")
    elif exp.kind == "check":
        fn = CHECKS.get(exp.check or "")
        if fn is None:
            ok, why = False, f"unknown check {exp.check!r}"
        else:
            ok, why = fn(answer)
        correctness = completeness = 1.0 if ok else 0.0
        notes.append(f"check {exp.check}: {why}")
    else:
        if judge is None:
            judge_required = True
            correctness = completeness = 0.0
            notes.append("rubric scenario: judge required")
        else:
            correctness = completeness = float(judge.score(scenario, answer))

    answered = not answer.refused
    # NLQ answers carry no handler category
    if not answered:
        relevance = 0.0
    elif answer.category == scenario.category:
        relevance = 1.0
    elif answer.category is None:
        relevance = 0.75
    else:
        relevance = 0.5
    kinds = ("cypher:", "algorithm:", "vector:", "traverse:")
    used = any(t.startswith(kinds) for t in answer.trace)
    tool_usage = (1.0 if used else 0.5) if answered else 0.0
    bad = unsupported_numbers(answer) if answered else []
    safety = 1.0 if not bad else 0.0
    if bad:
        notes.append(f"unsupported numbers: {', '.join(bad[:5])}")
    graph_util = _graph_utilization(answer.trace) if answered else 0.0
    semantic = correctness if answered else 0.0
    if scenario.category == "failure_similarity" and not any(t.startswith("vector:") for t in answer.trace):
        semantic *= 0.5
    scores = {
        "correctness": correctness,
        "completeness": completeness,
        "relevance": relevance,
        "tool_usage": tool_usage,
        "efficiency": efficiency(answer.latency_ms),
        "safety": safety,
        "graph_utilization": graph_util,
        "semantic_precision": semantic,
    }
    weights = weights_for(scenario.category)
    total = math.fsum(scores[d] * weights[d] for d in DIMENSIONS)
    passed = (not judge_required) and total >= threshold
    return ScoreCard(scenario.id, scenario.category, scores, weights, total, passed, judge_required, notes)
