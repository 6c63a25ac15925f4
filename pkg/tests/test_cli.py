from __future__ import annotations

import json

import pytest
import yaml

from assetgraph.cli import main
from assetgraph.graph import snapshot

from gak_playbooks import REJECTING, covering


@pytest.fixture(scope="module")
def snap(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["fixture", "--dir", str(d / "src"), "--snapshot", str(d / "g.jsonl")]) == 0
    return d


class TestCli:
    def test_etl_rebuild_is_byte_identical(self, snap, capsys):
        out = snap / "etl.jsonl"
        assert main(["etl", "--source-dir", str(snap / "src"), "--out", str(out)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["node_counts"]["Event"] == 6256 and report["rejected"] == []
        assert out.read_bytes() == (snap / "g.jsonl").read_bytes()

    def test_etl_missing_sources(self, tmp_path, capsys):
        assert main(["etl", "--out", str(tmp_path / "x.jsonl")]) == 2
        assert "missing source files" in capsys.readouterr().err

    @pytest.mark.parametrize("q,code,needle", [
        ("How many events are recorded for CWC04009?", 0, "3 events"),
        ("Explain the thermodynamics of refrigeration cycles.", 1, "no LLM client"),
    ])
    def test_ask(self, snap, capsys, monkeypatch, q, code, needle):
        monkeypatch.delenv("LLM_ENDPOINT", raising=False)
        assert main(["ask", q, "--snapshot", str(snap / "g.jsonl")]) == code
        assert needle in capsys.readouterr().out

    def test_ask_json(self, snap, capsys):
        assert main(["ask", "Rank all equipment by criticality.", "--snapshot", str(snap / "g.jsonl"), "--json"]) == 0
        env = json.loads(capsys.readouterr().out)
        assert env["handler"] == "criticality"

    def test_query(self, snap, capsys):
        assert main(["query", "MATCH (s:Site) RETURN count(*) AS n", "--snapshot", str(snap / "g.jsonl")]) == 0
        assert "1" in capsys.readouterr().out

    def test_query_error(self, snap, capsys):
        assert main(["query", "MATCH (s RETURN s", "--snapshot", str(snap / "g.jsonl")]) == 1
        assert "error" in capsys.readouterr().err

    def test_missing_snapshot(self, tmp_path, capsys):
        assert main(["query", "MATCH (n) RETURN n", "--snapshot", str(tmp_path / "none.jsonl")]) == 2

    def test_eval_custom40(self, snap, capsys, tmp_path):
        rep = tmp_path / "r.json"
        code = main(["eval", "--suite", "custom40", "--snapshot", str(snap / "g.jsonl"),
                     "--report", str(rep), "--format", "json"])
        assert code == 0
        assert json.loads(rep.read_text())["summary"]["passed"] == 40
        assert "Total" in capsys.readouterr().out

    def test_eval_nlq_needs_client(self, snap, capsys, monkeypatch):
        monkeypatch.delenv("LLM_ENDPOINT", raising=False)
        assert main(["eval", "--suite", "custom40", "--snapshot", str(snap / "g.jsonl"), "--tier", "nlq"]) == 2

    def test_enrich_saves_and_rejects(self, snap, tmp_path, capsys):
        g = tmp_path / "g.jsonl"
        g.write_bytes((snap / "g.jsonl").read_bytes())
        bad = tmp_path / "bad.yaml"
        bad.write_text(yaml.safe_dump(REJECTING))
        assert main(["enrich", "--gap", "Pumps", "--snapshot", str(g), "--playbook", str(bad)]) == 1
        assert g.read_bytes() == (snap / "g.jsonl").read_bytes()
        good = tmp_path / "good.yaml"
        good.write_text(yaml.safe_dump(covering(("pump",))))
        assert main(["enrich", "--gap", "Pumps", "--snapshot", str(g), "--playbook", str(good)]) == 0
        loaded = snapshot.load(g)
        assert any(n.get("source") == "LLM-derived" for n in loaded.graph.nodes())
        assert loaded.records
