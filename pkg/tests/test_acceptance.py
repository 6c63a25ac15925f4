"""Acceptance suite: one measured check per criterion, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (lines go straight to the
terminal) or ``python tests/test_acceptance.py`` for just the summary.
"""

from __future__ import annotations

import statistics
import sys
import tempfile
import time
from collections import Counter
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import networkx as nx
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

import gak_playbooks as P  # noqa: E402
from test_analytics import dense_pagerank, dep_graph, exhaustive_front, random_dag, random_digraph, random_instance  # noqa: E402
from test_cypher import make_case, oracle  # noqa: E402
from test_llm_nlq import BAD, GOOD, QUESTION, playbook  # noqa: E402
from test_vector import oracle_knn, unit_vectors  # noqa: E402

from assetgraph.analytics import SchedulingProblem, cascade, mtbf, nsga2_schedule, pagerank_arrays, upstream  # noqa: E402
from assetgraph.cypher import run  # noqa: E402
from assetgraph.etl import SourceBundle, build_graph, write_fixture  # noqa: E402
from assetgraph.evaluation import custom40_path, load_scenarios, run_suite  # noqa: E402
from assetgraph.graph import GraphStore, snapshot  # noqa: E402
from assetgraph.llm import StubLlmClient  # noqa: E402
from assetgraph.nlq import answer_nlq  # noqa: E402
from assetgraph.router import DETERMINISTIC, GAK, REFUSED, Router, Workspace  # noqa: E402
from assetgraph.vector import HnswIndex  # noqa: E402

Result = Tuple[bool, str]
_CACHE: Dict[str, object] = {}


def _fixture() -> Path:
    if "dir" not in _CACHE:
        d = Path(tempfile.mkdtemp(prefix="acceptance-"))
        write_fixture(d)
        _CACHE["dir"] = d
    return _CACHE["dir"]


def _graph() -> GraphStore:
    return build_graph(SourceBundle.from_dir(_fixture()))[0]


def _det_report():
    if "report" not in _CACHE:
        _CACHE["report"] = run_suite(load_scenarios(custom40_path()), "det", Workspace(_graph()), threshold=0.7)
    return _CACHE["report"]


def c01_etl_census() -> Result:
    t0 = time.perf_counter()
    _, report = build_graph(SourceBundle.from_dir(_fixture()))
    dt = time.perf_counter() - t0
    want = {"Site": 1, "Location": 4, "Equipment": 11, "Sensor": 110, "FailureMode": 12, "Event": 6256}
    got = {k: report.node_counts.get(k, 0) for k in want}
    ok = got == want and not report.rejected and dt < 10
    return ok, f"{got}, {len(report.rejected)} rejects, {dt:.2f} s"


def c02_cypher_oracle() -> Result:
    t0 = time.perf_counter()
    bad = 0
    for seed in range(500):
        g, q = make_case(seed)
        bad += Counter(run(g, q.text()).rows) != oracle(g, q)
    dt = time.perf_counter() - t0
    return bad == 0 and dt < 60, f"{500 - bad}/500 match, {dt:.1f} s"


def c03_latency() -> Result:
    med = statistics.median(r.latency_ms for r in _det_report().rows)
    return med <= 150.0, f"median {med:.1f} ms"


def c04_custom40() -> Result:
    o = _det_report().overall()
    return o.passed == 40 and o.total == 40, f"{o.passed}/{o.total} at 0.7, mean {o.avg_score:.3f}"


def c05_pagerank() -> Result:
    worst_err = worst_sum = 0.0
    for seed in range(20):
        n, src, dst = random_digraph(seed)
        x, _, _ = pagerank_arrays(n, src, dst)
        worst_err = max(worst_err, float(np.abs(x - dense_pagerank(n, src, dst)).max()))
        worst_sum = max(worst_sum, abs(float(x.sum()) - 1.0))
    return worst_err <= 1e-8 and worst_sum <= 1e-9, f"max Linf {worst_err:.1e}, max |sum-1| {worst_sum:.1e}"


def c06_hnsw() -> Result:
    data = unit_vectors(500, 384, seed=11)
    idx = HnswIndex(dim=384, M=16, ef_construction=200, seed=0)
    idx.add_many((f"v{i}", data[i]) for i in range(len(data)))
    queries = unit_vectors(100, 384, seed=12)
    r64, rfull = [], []
    for q in queries:
        exact = [f"v{i}" for i in oracle_knn(data, q, 10)]
        r64.append(len(set(exact) & {k for k, _ in idx.knn(q, 10, ef=64)}) / 10)
        rfull.append(len(set(exact) & {k for k, _ in idx.knn(q, 10, ef=len(idx))}) / 10)
    a, b = float(np.mean(r64)), float(np.mean(rfull))
    return a >= 0.95 and b == 1.0, f"recall@10 ef=64 {a:.3f}, ef=N {b:.3f}"


def c07_nsga2() -> Result:
    exact = never_dom = 0
    for trial in range(30):
        orders, deps = random_instance(trial)
        pts, front = exhaustive_front(SchedulingProblem(orders, 30, deps))
        res = nsga2_schedule(orders, 30, dependents=deps, seed=trial)
        if not pts:
            exact += not res.feasible
            never_dom += not res.feasible
            continue
        exact += res.front == front
        never_dom += all(not any(q[0] <= p[0] and q[1] <= p[1] and q != p for q in pts) for p in res.front)
    orders, deps = random_instance(3)
    a = nsga2_schedule(orders, 30, dependents=deps, seed=9)
    b = nsga2_schedule(orders, 30, dependents=deps, seed=9)
    repro = [(p.assignments, p.objectives) for p in a.plans] == [(p.assignments, p.objectives) for p in b.plans]
    return exact >= 28 and never_dom == 30 and repro, f"{exact}/30 exact, {never_dom}/30 non-dominated, reproducible={repro}"


def c08_cascade_mtbf() -> Result:
    from datetime import datetime, timedelta, timezone

    casc_ok = 0
    for seed in range(100):
        n, edges = random_dag(seed)
        g, ids = dep_graph(n, edges)
        ref = nx.DiGraph()
        ref.add_nodes_from(range(n))
        ref.add_edges_from(edges)
        root = seed % n
        casc_ok += (set(cascade(g, ids[root]).ids) == {ids[k] for k in nx.ancestors(ref, root)}
                    and set(upstream(g, ids[root]).ids) == {ids[k] for k in nx.descendants(ref, root)})
    t0 = datetime(2020, 1, 1, tzinfo=timezone.utc)
    mtbf_ok = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        secs = sorted(int(s) for s in rng.integers(0, 10 ** 8, int(rng.integers(2, 30))))
        g = GraphStore()
        eq = g.create_node(["Equipment"], {"equipment_id": "E"})
        for i, s in enumerate(secs):
            ev = g.create_node(["Event"], {"kind": "work_order", "wo_type": "corrective", "event_id": f"W{i}",
                                           "timestamp": t0 + timedelta(seconds=s)})
            g.create_edge("FOR_EQUIPMENT", ev, eq)
        ref = float(np.diff(secs).mean()) / 3600.0
        mtbf_ok += abs(mtbf(g, eq).mean_gap_hours - ref) <= 1e-9
    return casc_ok == 100 and mtbf_ok == 100, f"cascade {casc_ok}/100, MTBF {mtbf_ok}/100"


def c09_gak() -> Result:
    ws = Workspace(_graph(), client=StubLlmClient(P.covering()))
    router = Router(ws)
    tiers = [router.answer(f"What are the failure modes of a {k}?").tier for _ in range(5) for k in P.GAP_KEYS]
    created = [n for r in ws.cache.records() for n in r.node_ids]
    llm = all(ws.graph.node(n).get("source") == "LLM-derived" for n in created) and bool(created)
    rej = Workspace(_graph(), client=StubLlmClient(P.REJECTING))
    with tempfile.TemporaryDirectory() as tmp:
        before, after = Path(tmp) / "a.jsonl", Path(tmp) / "b.jsonl"
        rej.save(before)
        refused = Router(rej).answer("What are the failure modes of an electric motor?").tier == REFUSED
        rej.save(after)
        same = before.read_bytes() == after.read_bytes()
    calls = ws.client.call_count
    ok = calls == 10 and tiers.count(GAK) == 10 and tiers.count(DETERMINISTIC) == 40 and llm and refused and same
    return ok, f"{calls} calls over {len(tiers)} questions, LLM-derived={llm}, rejected byte-identical={same}"


def c10_nlq_retry() -> Result:
    g = _graph()
    outs = [answer_nlq(QUESTION, g, playbook(first, retry)) for first, retry in ((GOOD, None), (BAD, GOOD), (BAD, BAD))]
    got = [o.retries if o.ok else "failure" for o in outs]
    structured = not outs[2].ok and bool(outs[2].failure) and len(outs[2].errors) == 2
    return got == [0, 1, "failure"] and structured, f"valid {got[0]}, malformed-then-valid {got[1]}, malformed-twice {got[2]}"


def c11_snapshot() -> Result:
    g = _graph()
    with tempfile.TemporaryDirectory() as tmp:
        a, b = Path(tmp) / "a.jsonl", Path(tmp) / "b.jsonl"
        snapshot.save(g, a)
        snapshot.save(snapshot.load(a).graph, b)
        same = a.read_bytes() == b.read_bytes()
        size = a.stat().st_size
    return same, f"{size} bytes, byte-identical={same}"


CRITERIA: List[Tuple[int, str, Callable[[], Result]]] = [
    (1, "ETL census", c01_etl_census),
    (2, "Cypher oracle equivalence", c02_cypher_oracle),
    (3, "deterministic median latency", c03_latency),
    (4, "custom-40 pass rate", c04_custom40),
    (5, "PageRank accuracy", c05_pagerank),
    (6, "HNSW recall", c06_hnsw),
    (7, "NSGA-II fronts", c07_nsga2),
    (8, "cascade and MTBF oracles", c08_cascade_mtbf),
    (9, "GAK write-once", c09_gak),
    (10, "NLQ retry contract", c10_nlq_retry),
    (11, "snapshot round trip", c11_snapshot),
]


def line(num: int, name: str, ok: bool, detail: str) -> str:
    return f"criterion {num:>2} {name}: {'PASS' if ok else 'FAIL'} ({detail})"


class TestAcceptance:
    @pytest.mark.parametrize("num,name,fn", CRITERIA, ids=[f"c{n:02d}" for n, _, _ in CRITERIA])
    def test_criterion(self, num, name, fn, capsys):
        ok, detail = fn()
        with capsys.disabled():
            print("\n" + line(num, name, ok, detail))
        assert ok, detail


if __name__ == "__main__":
    failed = 0
    for num, name, fn in CRITERIA:
        ok, detail = fn()
        failed += not ok
        print(line(num, name, ok, detail))
    sys.exit(1 if failed else 0)
