from __future__ import annotations

import pytest
import yaml

from assetgraph.graph import GraphStore
from assetgraph.llm import ECHO, HttpLlmClient, LlmError, StubLlmClient, prompt_hash
from assetgraph.nlq import UNSUPPORTED, NlqError, answer_nlq, build_prompt, extract_cypher
from assetgraph.graph.schema import derive_schema

GOOD = "```cypher\nMATCH (e:Event) WHERE e.equipment_id = 'CWC04009' RETURN count(e) AS events\n```"
BAD = "```cypher\nMATCH (e:Event WHERE RETURN e\n```"
QUESTION = "How many events does CWC04009 have?"


def playbook(first, retry=None):
    rules = []
    if retry is not None:
        rules.append({"contains": "## Previous attempt", "reply": retry})
    rules.append({"contains": "## Question", "reply": first})
    rules.append({"contains": "Answer the question using only", "reply": "CWC04009 has the counted events."})
    return StubLlmClient({"rules": rules})


class TestStubClient:
    def test_hash_match_beats_rules(self):
        c = StubLlmClient({"responses": {prompt_hash("hi"): ["one", "two"]}, "rules": [{"contains": "h", "reply": "r"}]})
        assert [c.complete("hi").text for _ in range(3)] == ["one", "two", "two"]
        assert c.complete("ha").text == "r"
        assert c.call_count == 4

    def test_echo_and_default(self):
        c = StubLlmClient({"rules": [{"contains": "x", "reply": ECHO}], "default": "d"})
        assert c.complete("xyz").text == "xyz"
        assert c.complete("nothing").text == "d"

    def test_unscripted_prompt_raises(self):
        with pytest.raises(LlmError):
            StubLlmClient({}).complete("anything")

    def test_playbook_file(self, tmp_path):
        p = tmp_path / "pb.yaml"
        p.write_text(yaml.safe_dump({"default": "ok"}))
        assert StubLlmClient(p).complete("q").text == "ok"

    @pytest.mark.parametrize("bad", [[], {"rules": [{"reply": "x"}]}, {"default": []}])
    def test_bad_playbooks(self, bad):
        with pytest.raises(LlmError):
            StubLlmClient(bad)

    def test_http_client_needs_endpoint(self, monkeypatch):
        monkeypatch.delenv("LLM_ENDPOINT", raising=False)
        with pytest.raises(LlmError):
            HttpLlmClient()

    def test_http_client_unreachable_endpoint(self):
        with pytest.raises(LlmError):
            HttpLlmClient("http://127.0.0.1:9/never", timeout=1).complete("x")


class TestRetryContract:
    @pytest.mark.parametrize(
        "first,retry,retries,ok",
        [(GOOD, None, 0, True), (BAD, GOOD, 1, True), (BAD, BAD, 1, False)],
        ids=["valid-first", "malformed-then-valid", "malformed-twice"],
    )
    def test_retry_counts(self, graph, first, retry, retries, ok):
        out = answer_nlq(QUESTION, graph, playbook(first, retry))
        assert out.retries == retries
        assert out.ok is ok
        if ok:
            assert out.result.scalar() == len(graph.nodes_by_property("Event", "equipment_id", "CWC04009"))
            assert out.answer
        else:
            assert out.failure.startswith("both attempts failed")
            assert len(out.errors) == 2 and all("syntax error" in e for e in out.errors)

    def test_retry_prompt_carries_error(self, graph):
        c = playbook(BAD, GOOD)
        answer_nlq(QUESTION, graph, c)
        assert "It failed with: syntax error" in c.calls[1]

    def test_write_queries_are_refused(self, graph):
        create = "CREATE (x:Equipment {name: 'evil'})"
        out = answer_nlq(QUESTION, graph, playbook(create, create))
        assert not out.ok
        assert graph.nodes_by_property("Equipment", "name", "evil") == []

    def test_unsupported_sentinel(self, graph):
        out = answer_nlq("What is affected if Chiller 5 fails?", graph, playbook(UNSUPPORTED))
        assert out.unsupported and not out.ok and out.retries == 0

    def test_no_client(self, graph):
        with pytest.raises(NlqError):
            answer_nlq(QUESTION, graph, None)


class TestPrompt:
    def test_prompt_sections(self, graph):
        text = build_prompt(derive_schema(graph), QUESTION).text
        for section in ("## Schema", "## Examples", "## Rules", "## Question"):
            assert section in text
        assert "Equipment" in text and "FOR_EQUIPMENT" in text

    def test_empty_schema(self):
        with pytest.raises(NlqError):
            build_prompt(derive_schema(GraphStore()), QUESTION)

    @pytest.mark.parametrize(
        "text,query",
        [
            ("```cypher\nMATCH (n) RETURN n\n```", "MATCH (n) RETURN n"),
            ("Sure:\nMATCH (n)\nRETURN n\n\nDone", "MATCH (n) RETURN n"),
            ("CALL unsupported", "CALL unsupported"),
        ],
    )
    def test_extract_cypher(self, text, query):
        assert extract_cypher(text) == query
