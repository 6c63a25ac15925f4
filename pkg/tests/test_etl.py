from __future__ import annotations

import csv
import json
import shutil
import time

import pytest
import yaml

from assetgraph.etl import EtlFatalError, SourceBundle, apply_topology, build_graph, fixture_graph
from assetgraph.etl.sources import Record

CENSUS = {"Site": 1, "Location": 4, "Equipment": 11, "Sensor": 110, "FailureMode": 12, "Event": 6256}


def copy_fixture(src, dst):
    shutil.copytree(src, dst)
    return dst


class TestCensus:
    def test_reference_census(self, fixture_dir):
        t0 = time.perf_counter()
        graph, report = build_graph(SourceBundle.from_dir(fixture_dir))
        assert time.perf_counter() - t0 < 10
        assert report.rejected == []
        nodes, _ = graph.census()
        assert {k: nodes.get(k) for k in CENSUS} == CENSUS
        assert report.census_matches(graph)

    def test_census_equals_raw_file_counts(self, fixture_dir, graph):
        with open(fixture_dir / "events.csv", newline="") as f:
            events = list(csv.DictReader(f))
        with open(fixture_dir / "hierarchy.csv", newline="") as f:
            kinds = [r["kind"] for r in csv.DictReader(f)]
        sensors = json.loads((fixture_dir / "sensors.json").read_text())
        fmsr = yaml.safe_load((fixture_dir / "fmsr.yaml").read_text())
        nodes, edges = graph.census()
        assert nodes["Event"] == len(events) == edges["FOR_EQUIPMENT"]
        assert nodes["Equipment"] == kinds.count("equipment") == edges["CONTAINS_EQUIPMENT"]
        assert nodes["Sensor"] == len(sensors) == edges["HAS_SENSOR"]
        assert nodes["FailureMode"] == len(fmsr)

    def test_experienced_edges_come_from_corrective_events(self, fixture_dir, graph):
        with open(fixture_dir / "events.csv", newline="") as f:
            pairs = {(e["equipment_id"], e["failure_mode"]) for e in csv.DictReader(f)
                     if e["wo_type"] == "corrective" and e["failure_mode"]}
        assert graph.census()[1]["EXPERIENCED"] == len(pairs)

    def test_failure_modes_are_embedded(self, graph):
        for nid in graph.nodes_by_label("FailureMode"):
            assert len(graph.node(nid).get("embedding")) == 384

    def test_telemetry_is_optional(self):
        g, report = fixture_graph(with_telemetry=True)
        assert report.rejected == []
        assert g.label_count("MonitoringRule") > 0 and g.label_count("SensorReading") > 0


class TestRejections:
    @pytest.mark.parametrize(
        "filename,edit,fragment",
        [
            ("events.csv", lambda t: t + "X-1,2020-01-01T00:00:00Z,NOPE,alert,x,,,,,,\n", "unknown equipment"),
            ("events.csv", lambda t: t + "X-2,yesterday,CWC04001,alert,x,,,,,,\n", "X-2"),
            ("events.csv", lambda t: t + "X-3,2020-01-01T00:00:00Z,CWC04001,gossip,x,,,,,,\n", "unknown kind"),
            ("events.csv", lambda t: t + t.splitlines()[1] + "\n", "duplicate event_id"),
            ("hierarchy.csv", lambda t: t + "equipment,EQ-X,Orphan,LOC-NONE,Unit,,chiller\n", "unknown location"),
            ("topology.yaml", lambda t: t + "- {from: CWC04001, rel: DEPENDS_ON, to: CWC04001}\n", "self dependency"),
            ("topology.yaml", lambda t: t + "- {from: CWC04001, rel: LIKES, to: CWC04002}\n", "unknown topology rel"),
        ],
    )
    def test_bad_records_are_rejected_not_fatal(self, fixture_dir, tmp_path, filename, edit, fragment):
        d = copy_fixture(fixture_dir, tmp_path / "src")
        p = d / filename
        p.write_text(edit(p.read_text(encoding="utf-8")), encoding="utf-8")
        graph, report = build_graph(SourceBundle.from_dir(d))
        assert len(report.rejected) == 1
        assert fragment in report.rejected[0].reason
        assert report.rejected[0].line > 0
        assert graph.label_count("Equipment") >= 11

    @pytest.mark.parametrize(
        "filename,content",
        [
            ("events.csv", "event_id,timestamp\nA,B\n"),
            ("sensors.json", "{not json"),
            ("fmsr.yaml", "a: [1, 2\n"),
            ("topology.yaml", "just a string\n"),
        ],
    )
    def test_structural_errors_are_fatal(self, fixture_dir, tmp_path, filename, content):
        d = copy_fixture(fixture_dir, tmp_path / "src")
        (d / filename).write_text(content, encoding="utf-8")
        with pytest.raises(EtlFatalError) as info:
            build_graph(SourceBundle.from_dir(d))
        assert filename in str(info.value)


class TestTopology:
    def test_shared_system_pairs_collapse(self, fresh_graph):
        before = len(fresh_graph.edges_by_type("SHARES_SYSTEM_WITH"))
        recs = [Record("t", 1, {"from": "CWC04001", "rel": "SHARES_SYSTEM_WITH", "to": "CWC04002"}),
                Record("t", 2, {"from": "CWC04002", "rel": "shares_system_with", "to": "CWC04001"}),
                Record("t", 3, {"from": "Chiller 1", "rel": "SHARES_SYSTEM_WITH", "to": "chiller 2"})]
        added = apply_topology(fresh_graph, recs)
        after = len(fresh_graph.edges_by_type("SHARES_SYSTEM_WITH"))
        assert after - before == added <= 1
