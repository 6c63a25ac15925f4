"""Scenario replay, 8-dimension scoring and report emitters."""

from .report import FORMATS, from_json, render, to_csv, to_json, to_table, write_report
from .runner import CategoryStats, ScenarioResult, SuiteError, SuiteReport, run_suite
from .scenarios import (
    CUSTOM_CATEGORIES,
    Expectation,
    Scenario,
    ScenarioError,
    custom40_path,
    dumps_scenarios,
    load_scenarios,
    loads_scenarios,
    parse_scenario,
)
from .scoring import (
    CHECKS,
    DEFAULT_WEIGHTS,
    DIMENSIONS,
    PASS_THRESHOLD,
    HttpJudge,
    Judge,
    ScoreCard,
    efficiency,
    score_answer,
    unsupported_numbers,
    values_match,
    weights_for,
)

__all__ = [
    "CHECKS",
    "CUSTOM_CATEGORIES",
    "CategoryStats",
    "DEFAULT_WEIGHTS",
    "DIMENSIONS",
    "Expectation",
    "FORMATS",
    "HttpJudge",
    "Judge",
    "PASS_THRESHOLD",
    "Scenario",
    "ScenarioError",
    "ScenarioResult",
    "ScoreCard",
    "SuiteError",
    "SuiteReport",
    "custom40_path",
    "dumps_scenarios",
    "efficiency",
    "from_json",
    "load_scenarios",
    "loads_scenarios",
    "parse_scenario",
    "render",
    "run_suite",
    "score_answer",
    "to_csv",
    "to_json",
    "to_table",
    "unsupported_numbers",
    "values_match",
    "weights_for",
    "write_report",
]
