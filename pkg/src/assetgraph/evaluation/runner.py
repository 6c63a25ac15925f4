"""Replay a scenario suite through the router and aggregate scorecards."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from ..llm import LlmClient
from ..router import Answer, Router, Workspace, to_jsonable
from .scenarios import Scenario
from .scoring import PASS_THRESHOLD, Judge, ScoreCard, score_answer

logger = logging.getLogger(__name__)

SUITE_TIERS = {"det": "det", "nlq": "nlq", "gak": "auto"}


class SuiteError(RuntimeError):
    pass


@dataclass
class ScenarioResult:
    scenario_id: str
    category: str
    question: str
    tier: str
    handler: Optional[str]
    answer: str
    value: Any
    latency_ms: float
    card: ScoreCard

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario_id": self.scenario_id,
            "category": self.category,
            "question": self.question,
            "tier": self.tier,
            "handler": self.handler,
            "answer": self.answer,
            "value": to_jsonable(self.value),
            "latency_ms": self.latency_ms,
            "card": self.card.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ScenarioResult":
        return cls(d["scenario_id"], d["category"], d["question"], d["tier"], d.get("handler"), d["answer"],
                   d.get("value"), d["latency_ms"], ScoreCard.from_dict(d["card"]))


@dataclass
class CategoryStats:
    category: str
    passed: int
    total: int
    avg_score: float
    avg_latency_ms: float
    judge_required: int = 0


def _stats(category: str, rows: Sequence[ScenarioResult]) -> CategoryStats:
    scored = [r for r in rows if not r.card.judge_required]
    n = len(scored)
    return CategoryStats(
        category,
        sum(r.card.passed for r in scored),
        n,
        math.fsum(r.card.total for r in scored) / n if n else 0.0,
        math.fsum(r.latency_ms for r in scored) / n if n else 0.0,
        len(rows) - n,
    )


@dataclass
class SuiteReport:
    tier: str
    threshold: float
    rows: List[ScenarioResult] = field(default_factory=list)

    def categories(self) -> List[CategoryStats]:
        order: List[str] = []
        for r in self.rows:
            if r.category not in order:
                order.append(r.category)
        return [_stats(c, [r for r in self.rows if r.category == c]) for c in order]

    def overall(self) -> CategoryStats:
        return _stats("total", self.rows)

    @property
    def all_passed(self) -> bool:
        """True when every scenario not waiting on a judge passed."""
        return all(r.card.passed for r in self.rows if not r.card.judge_required)

    def to_dict(self) -> Dict[str, Any]:
        o = self.overall()
        return {
            "tier": self.tier,
            "threshold": self.threshold,
            "summary": {"passed": o.passed, "total": o.total, "avg_score": o.avg_score,
                        "avg_latency_ms": o.avg_latency_ms, "judge_required": o.judge_required},
            "categories": [vars(c) for c in self.categories()],
            "rows": [r.to_dict() for r in self.rows],
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "SuiteReport":
        return cls(d["tier"], d["threshold"], [ScenarioResult.from_dict(r) for r in d["rows"]])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SuiteReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def run_suite(
    scenarios: Sequence[Scenario],
    tier: str,
    workspace: Union[Workspace, str, Path],
    client: Optional[LlmClient] = None,
    judge: Optional[Judge] = None,
    threshold: float = PASS_THRESHOLD,
    workers: int = 1,
) -> SuiteReport:
    """Answer and score every scenario; rows keep suite order whatever the concurrency."""
    if tier not in SUITE_TIERS:
        raise SuiteError(f"tier must be one of {', '.join(SUITE_TIERS)}")
    if not isinstance(workspace, Workspace):
        workspace = Workspace.load(workspace, client)
    elif client is not None:
        workspace.client = client
    if tier in ("nlq", "gak") and workspace.client is None:
        raise SuiteError(f"the {tier} tier needs an LLM client")
    router = Router(workspace)
    route_tier = SUITE_TIERS[tier]

    def one(sc: Scenario) -> ScenarioResult:
        ans: Answer = router.answer(sc.question, tier=route_tier)
        card = score_answer(sc, ans, judge, threshold)
        logger.info("%s %s %.3f %s", sc.id, ans.tier, card.total, "pass" if card.passed else "FAIL")
        return ScenarioResult(sc.id, sc.category, sc.question, ans.tier, ans.handler, ans.text, ans.value,
                              ans.latency_ms, card)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, scenarios))
    else:
        rows = [one(s) for s in scenarios]
    return SuiteReport(tier, threshold, rows)
