from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from assetgraph.evaluation import (
    CUSTOM_CATEGORIES,
    DIMENSIONS,
    ScenarioError,
    SuiteError,
    custom40_path,
    efficiency,
    from_json,
    load_scenarios,
    loads_scenarios,
    parse_scenario,
    run_suite,
    score_answer,
    to_csv,
    to_json,
    to_table,
    unsupported_numbers,
    values_match,
    weights_for,
)
from assetgraph.router import DETERMINISTIC, REFUSED, Answer, Workspace

import custom40_oracle


def scenario(kind="exact", category="criticality", **exp):
    return parse_scenario({"id": "s1", "category": category, "question": "q?", "expects": {"kind": kind, **exp}})


def answer(value, text="ok", tier=DETERMINISTIC, category="criticality", trace=("algorithm: pagerank",), latency=10.0):
    a = Answer("q?", text, tier, list(trace), {}, value, "h", category)
    a.latency_ms = latency
    return a


@pytest.fixture(scope="module")
def det_report(graph):
    return run_suite(load_scenarios(custom40_path()), "det", Workspace(graph))


class TestWeights:
    @pytest.mark.parametrize("category", list(CUSTOM_CATEGORIES) + ["iot", "unknown"])
    def test_weights_cover_dimensions_and_sum_to_one(self, category):
        w = weights_for(category)
        assert set(w) == set(DIMENSIONS)
        assert math.isclose(math.fsum(w.values()), 1.0, abs_tol=1e-12)

    def test_similarity_upweights_semantic_precision(self):
        assert weights_for("failure_similarity")["semantic_precision"] == 0.25
        assert weights_for("criticality")["semantic_precision"] == 0.10

    @pytest.mark.parametrize("ms,score", [(0, 1.0), (150, 1.0), (150.1, 0.7), (2000, 0.7), (2001, 0.4),
                                          (15000, 0.4), (15001, 0.1), (1e7, 0.1)])
    def test_latency_bands(self, ms, score):
        assert efficiency(ms) == score


class TestScoring:
    def test_exact_hit_scores_full(self):
        card = score_answer(scenario(value=3), answer(3, "3 events"))
        assert card.scores["correctness"] == card.scores["completeness"] == 1.0
        assert math.isclose(card.total, 1.0) and card.passed

    def test_exact_miss(self):
        card = score_answer(scenario(value=3), answer(4, "4 events"))
        assert card.scores["correctness"] == 0.0
        oracle = math.fsum(v * card.weights[d] for d, v in card.scores.items())
        assert math.isclose(card.total, oracle)

    def test_set_partial_recall_and_precision(self):
        card = score_answer(scenario("set", values=["a", "b", "c"]), answer(["a", "b", "z", "y"]))
        assert math.isclose(card.scores["completeness"], 2 / 3)
        assert math.isclose(card.scores["correctness"], 2 / 4)

    def test_rubric_without_judge_is_excluded(self):
        card = score_answer(scenario("rubric", rubric="mentions chillers"), answer(None))
        assert card.judge_required and not card.passed

    def test_rubric_with_judge(self):
        class Fixed:
            def score(self, sc, ans):
                return 0.8

        card = score_answer(scenario("rubric", rubric="r"), answer(None), judge=Fixed())
        assert card.scores["correctness"] == 0.8 and not card.judge_required

    def test_refusal_scores_zero_on_answer_dimensions(self):
        card = score_answer(scenario(value=3), answer(None, "no", tier=REFUSED, trace=()))
        for d in ("relevance", "tool_usage", "graph_utilization", "semantic_precision"):
            assert card.scores[d] == 0.0
        assert not card.passed

    def test_fabricated_number_fails_safety(self):
        card = score_answer(scenario(value=3), answer(3, "3 events on 17 chillers"))
        assert card.scores["safety"] == 0.0

    def test_similarity_without_vector_trace_halves_precision(self):
        sc = scenario("set", category="failure_similarity", values=["a"])
        plain = score_answer(sc, answer(["a"], category="failure_similarity"))
        vec = score_answer(sc, answer(["a"], category="failure_similarity", trace=("vector: hnsw k=3",)))
        assert plain.scores["semantic_precision"] == 0.5 and vec.scores["semantic_precision"] == 1.0

    @pytest.mark.parametrize("exp,got,ok", [(1.0, 1.0000001, True), (1.0, 1.1, False), ("Chiller 6", " chiller 6", True),
                                            ([1, 2], [1, 2], True), ([1, 2], [2, 1], False), (None, None, True)])
    def test_values_match(self, exp, got, ok):
        assert values_match(exp, got) is ok

    @given(st.integers(0, 10 ** 6))
    def test_payload_numbers_are_supported(self, n):
        a = Answer("how many?", f"There are {n} events.", DETERMINISTIC, [], {"count": n}, n)
        assert unsupported_numbers(a) == []


class TestScenarioFiles:
    def test_custom40_is_the_oracle_output(self, fixture_dir):
        shipped = [json.loads(l) for l in custom40_path().read_text().splitlines() if l.strip()]
        assert shipped == custom40_oracle.build(fixture_dir)

    def test_custom40_category_counts(self):
        counts = Counter(s.category for s in load_scenarios(custom40_path()))
        assert counts == {"multi_hop_dependency": 8, "cross_asset_correlation": 6, "failure_similarity": 6,
                          "criticality": 5, "maintenance_optimization": 5, "root_cause": 5, "temporal": 5}

    def test_duplicate_ids_rejected(self):
        line = json.dumps({"id": "a", "category": "c", "question": "q", "expects": {"kind": "exact", "value": 1}})
        with pytest.raises(ScenarioError, match="duplicate"):
            loads_scenarios(line + "\n" + line)

    @pytest.mark.parametrize("record", [
        [],
        {"id": "", "category": "c", "question": "q", "expects": {"kind": "exact", "value": 1}},
        {"id": "a", "category": "c", "question": "q", "expects": {"kind": "fuzzy"}},
        {"id": "a", "category": "c", "question": "q", "expects": {"kind": "exact"}},
        {"id": "a", "category": "c", "question": "q", "expects": {"kind": "set", "values": 3}},
        {"id": "a", "category": "c", "question": "q", "expects": {"kind": "rubric", "rubric": " "}},
        {"id": "a", "category": "c", "question": "q", "expects": {"kind": "exact", "value": 1, "tolerance": -1}},
        {"id": "a", "category": "c", "question": "q", "expects": {"kind": "exact", "value": 1}, "deterministic": "yes"},
    ])
    def test_bad_records(self, record):
        with pytest.raises(ScenarioError):
            parse_scenario(record, 1)

    def test_invalid_json_reports_record(self):
        with pytest.raises(ScenarioError, match="record 2"):
            loads_scenarios('# comment\n{"id": "a", "category": "c", "question": "q", "expects": {"kind": "check", "check": "nonempty"}}\n{oops')


class TestSuite:
    def test_det_run_passes_all_forty(self, det_report):
        assert len(det_report.rows) == 40
        assert det_report.overall().passed == 40 and det_report.all_passed

    def test_aggregates_recompute_from_rows(self, det_report):
        for cat in det_report.categories():
            rows = [r for r in det_report.rows if r.category == cat.category]
            assert cat.total == len(rows)
            assert cat.passed == sum(r.card.passed for r in rows)
            assert math.isclose(cat.avg_score, math.fsum(r.card.total for r in rows) / len(rows))

    def test_json_round_trip(self, det_report):
        assert from_json(to_json(det_report)) == det_report

    def test_csv_has_header_plus_one_row_each(self, det_report):
        rows = list(csv.reader(io.StringIO(to_csv(det_report))))
        assert len(rows) == len(det_report.rows) + 1
        assert rows[0][-len(DIMENSIONS):] == list(DIMENSIONS)

    def test_table_lists_categories_and_total(self, det_report):
        lines = to_table(det_report).splitlines()
        body = [l for l in lines[3:] if not l.startswith("-")]
        assert len(body) == 8
        assert body[-1].startswith("Total")

    def test_nlq_without_client_is_an_error(self, graph):
        with pytest.raises(SuiteError):
            run_suite(load_scenarios(custom40_path())[:1], "nlq", Workspace(graph))

    def test_unknown_tier(self, graph):
        with pytest.raises(SuiteError):
            run_suite([], "fast", Workspace(graph))

    def test_empty_suite(self, graph):
        rep = run_suite([], "det", Workspace(graph))
        assert rep.all_passed and rep.overall().total == 0
        assert "Total" in to_table(rep)

    def test_workers_keep_order(self, graph):
        scs = load_scenarios(custom40_path())[:8]
        rep = run_suite(scs, "det", Workspace(graph), workers=4)
        assert [r.scenario_id for r in rep.rows] == [s.id for s in scs]
