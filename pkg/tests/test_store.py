from __future__ import annotations

import string
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from assetgraph.graph import Direction, GraphError, GraphStore, Provenance, snapshot
from assetgraph.graph.store import LLM_SOURCE
from assetgraph.graph.snapshot import SnapshotError


def small_graph() -> GraphStore:
    g = GraphStore()
    a = g.create_node(["Equipment"], {"equipment_id": "A", "name": "Pump A"})
    b = g.create_node(["Equipment"], {"equipment_id": "B", "name": "Pump B"})
    s = g.create_node(["Sensor"], {"sensor_id": "S1", "t": datetime(2020, 1, 2, 3, 4, 5, tzinfo=timezone.utc)})
    g.create_edge("DEPENDS_ON", a, b)
    g.create_edge("HAS_SENSOR", a, s, {"w": 1.5})
    return g


class TestGraphStore:
    def test_ids_are_monotone(self):
        g = small_graph()
        assert [n.id for n in g.nodes()] == ["n1", "n2", "n3"]
        assert [e.id for e in g.edges()] == ["e1", "e2"]

    def test_label_and_property_lookup(self):
        g = small_graph()
        assert g.nodes_by_label("Equipment") == ["n1", "n2"]
        assert g.nodes_by_property("Equipment", "equipment_id", "B") == ["n2"]
        assert g.nodes_by_property("Equipment", "equipment_id", "Z") == []

    @pytest.mark.parametrize(
        "direction,expected",
        [(Direction.OUT, ["n2", "n3"]), (Direction.IN, []), (Direction.BOTH, ["n2", "n3"])],
    )
    def test_neighbors(self, direction, expected):
        g = small_graph()
        assert [n.id for _, n in g.neighbors("n1", None, direction)] == expected

    def test_neighbors_filter_by_type(self):
        g = small_graph()
        assert [n.id for _, n in g.neighbors("n2", ["DEPENDS_ON"], Direction.IN)] == ["n1"]

    @pytest.mark.parametrize(
        "call",
        [
            lambda g: g.create_node([]),
            lambda g: g.create_edge("DEPENDS_ON", "n1", "n99"),
            lambda g: g.create_edge("dependsOn", "n1", "n2"),
            lambda g: g.create_node(["X"], node_id="n1"),
        ],
    )
    def test_rejected_mutations(self, call):
        g = small_graph()
        before = snapshot.dumps(g)
        with pytest.raises(GraphError):
            call(g)
        assert snapshot.dumps(g) == before

    def test_llm_provenance_sets_source(self):
        g = GraphStore()
        nid = g.create_node(["FailureMode"], {"name": "x"}, Provenance.LLM)
        assert g.node(nid).get("source") == LLM_SOURCE
        assert g.llm_derived_nodes() == [nid]

    def test_delete_node_removes_incident_edges(self):
        g = small_graph()
        g.delete_node("n1")
        assert g.edge_count == 0
        assert g.nodes_by_property("Equipment", "equipment_id", "A") == []

    def test_census(self):
        nodes, edges = small_graph().census()
        assert nodes == {"Equipment": 2, "Sensor": 1}
        assert edges == {"DEPENDS_ON": 1, "HAS_SENSOR": 1}


_text = st.text(alphabet=string.ascii_letters + " é'\"\\", max_size=8)
_value = st.one_of(st.integers(-10**6, 10**6), st.floats(allow_nan=False, allow_infinity=False), _text, st.booleans(),
                   st.lists(st.integers(-5, 5), max_size=3))


class TestSnapshot:
    def test_round_trip_preserves_everything(self, tmp_path):
        g = small_graph()
        p = tmp_path / "g.jsonl"
        snapshot.save(g, p, [{"gap_key": "pump", "x": 1}])
        snap = snapshot.load(p)
        assert snap.records == [{"gap_key": "pump", "x": 1}]
        assert snapshot.dumps(snap.graph, snap.records) == p.read_text(encoding="utf-8")
        assert snap.graph.node("n3").get("t") == datetime(2020, 1, 2, 3, 4, 5, tzinfo=timezone.utc)

    def test_fixture_round_trip_is_byte_identical(self, graph, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        snapshot.save(graph, a)
        snapshot.save(snapshot.load(a).graph, b)
        assert a.read_bytes() == b.read_bytes()

    @pytest.mark.parametrize("mutate", [lambda t: t.rsplit("\n", 2)[0] + "\n", lambda t: t.replace('"n1"', '"n2"', 1),
                                        lambda t: "not json\n" + t])
    def test_corrupt_files_are_rejected(self, tmp_path, mutate):
        p = tmp_path / "g.jsonl"
        p.write_text(mutate(snapshot.dumps(small_graph())), encoding="utf-8")
        with pytest.raises(SnapshotError):
            snapshot.load(p)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.dictionaries(st.sampled_from(["a", "b", "c"]), _value, max_size=3), min_size=1, max_size=6),
           st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), max_size=8))
    def test_round_trip_property(self, props, pairs):
        g = GraphStore()
        ids = [g.create_node(["L"], p) for p in props]
        for i, j in pairs:
            g.create_edge("R", ids[i % len(ids)], ids[j % len(ids)])
        text = snapshot.dumps(g)
        assert snapshot.dumps(snapshot.loads(text).graph) == text
