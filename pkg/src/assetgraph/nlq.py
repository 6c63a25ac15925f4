"""Text-to-Cypher answering over the live schema.

The prompt carries the derived schema with real property names and sample
values, eight worked examples and a Cypher-only constraint. A failing
query gets exactly one retry with the error appended. Synthesis sees only
the executed query's result table.
"""

from __future__ import annotations

import logging
import re
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .cypher import CypherError, ResultTable, execute, parse, validate
from .cypher import ast as A
from .cypher.errors import CypherValidationError
from .graph.schema import SchemaDescriptor, derive_schema
from .graph.store import GraphStore
from .llm import LlmClient, LlmError

logger = logging.getLogger(__name__)

UNSUPPORTED = "CALL unsupported"
MAX_SYNTHESIS_ROWS = 50

FEW_SHOT: List[Tuple[str, str]] = [
    (
        "How many events are recorded for CWC04009?",
        "MATCH (e:Event) WHERE e.equipment_id = 'CWC04009' RETURN count(e)",
    ),
    (
        "Which sensors are installed on Chiller 6?",
        "MATCH (q:Equipment {name: 'Chiller 6'})-[:HAS_SENSOR]->(s:Sensor) RETURN s.sensor_id, s.name, s.type ORDER BY s.sensor_id",
    ),
    (
        "How many events of each kind does AHU 1 have?",
        "MATCH (e:Event)-[:FOR_EQUIPMENT]->(q:Equipment {name: 'AHU 1'}) RETURN e.kind AS kind, count(*) AS events ORDER BY kind",
    ),
    (
        "Which three equipment have the most corrective work orders?",
        "MATCH (e:Event {kind: 'work_order', wo_type: 'corrective'})-[:FOR_EQUIPMENT]->(q:Equipment) RETURN q.name AS equipment, count(e) AS corrective ORDER BY corrective DESC, equipment LIMIT 3",
    ),
    (
        "What failure modes can vibration sensors detect?",
        "MATCH (s:Sensor {type: 'vibration'})-[:MONITORS]->(fm:FailureMode) RETURN DISTINCT fm.name ORDER BY fm.name",
    ),
    (
        "List the alerts for Chiller 3 during March 2021.",
        "MATCH (e:Event {kind: 'alert'})-[:FOR_EQUIPMENT]->(q:Equipment {name: 'Chiller 3'}) WHERE e.timestamp >= '2021-03-01T00:00:00Z' AND e.timestamp < '2021-04-01T00:00:00Z' RETURN e.event_id, e.timestamp, e.description ORDER BY e.timestamp",
    ),
    (
        "Which failure modes mention refrigerant?",
        "MATCH (fm:FailureMode) WHERE toLower(fm.description) CONTAINS 'refrigerant' OR toLower(fm.name) CONTAINS 'refrigerant' RETURN fm.name ORDER BY fm.name",
    ),
    (
        "What equipment is affected if Chiller 5 fails?",
        UNSUPPORTED,
    ),
]

CONSTRAINTS = (
    "Answer with a single read-only Cypher query only, inside one ```cypher block.\n"
    "Use only the labels, relationship types and property names listed in the schema, "
    "and property values exactly as they appear in the samples.\n"
    "Timestamps compare against ISO-8601 strings such as '2019-01-01T00:00:00Z'.\n"
    f"If the question needs multi-step graph algorithms, dependency cascades, rankings, "
    f"scheduling or forecasting rather than a lookup, answer with `{UNSUPPORTED}`."
)


class NlqError(RuntimeError):
    pass


@dataclass(frozen=True)
class NlqPrompt:
    schema: str
    few_shot: str
    constraints: str
    question: str

    @property
    def text(self) -> str:
        return (
            "You translate questions about an industrial asset graph into Cypher.\n\n"
            f"## Schema\n{self.schema}\n\n"
            f"## Examples\n{self.few_shot}\n\n"
            f"## Rules\n{self.constraints}\n\n"
            f"## Question\n{self.question}\n"
        )


@dataclass
class Attempt:
    prompt: str
    completion: str
    query: str
    error: Optional[str] = None


@dataclass
class NlqOutcome:
    question: str
    attempts: List[Attempt] = field(default_factory=list)
    result: Optional[ResultTable] = None
    answer: str = ""
    ok: bool = False
    unsupported: bool = False
    failure: Optional[str] = None
    synthesis_prompt: Optional[str] = None
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency_ms: float = 0.0

    @property
    def retries(self) -> int:
        return max(len(self.attempts) - 1, 0)

    @property
    def errors(self) -> List[str]:
        return [a.error for a in self.attempts if a.error]

    @property
    def final_query(self) -> Optional[str]:
        return self.attempts[-1].query if self.attempts else None


def render_examples(examples: Sequence[Tuple[str, str]]) -> str:
    return "\n\n".join(f"Q: {q}\n```cypher\n{c}\n```" for q, c in examples)


def build_prompt(
    schema: SchemaDescriptor,
    question: str,
    few_shot: Sequence[Tuple[str, str]] = FEW_SHOT,
) -> NlqPrompt:
    if schema.is_empty():
        raise NlqError("schema is empty: build the graph before asking questions")
    if not question.strip():
        raise NlqError("question is empty")
    return NlqPrompt(schema.render(), render_examples(few_shot), CONSTRAINTS, question.strip())


_FENCE = re.compile(r"```[ \t]*([A-Za-z]*)[ \t]*\n?(.*?)```", re.S)
_START = re.compile(r"^\s*(MATCH|CREATE|CALL)\b", re.I)


def extract_cypher(text: str) -> str:
    """First fenced block, else the first MATCH/CREATE line onward, else the text."""
    m = _FENCE.search(text)
    if m:
        return m.group(2).strip()
    lines = text.splitlines()
    for i, line in enumerate(lines):
        if _START.match(line):
            out = []
            for rest in lines[i:]:
                if not rest.strip():
                    break
                out.append(rest.strip())
            return " ".join(out)
    return text.strip()


def is_unsupported(query: str) -> bool:
    return re.fullmatch(r"CALL\s+unsupported\s*;?", query.strip(), re.I) is not None


def run_readonly(graph: GraphStore, query: str) -> ResultTable:
    q = validate(parse(query))
    if isinstance(q, A.CreateQuery):
        raise CypherValidationError("generated queries must be read-only", 1, 1)
    return execute(q, graph)


def retry_prompt(base: str, query: str, error: str) -> str:
    return (
        f"{base}\n## Previous attempt\n```cypher\n{query}\n```\n"
        f"It failed with: {error}\nReturn a corrected query.\n"
    )


def answer_nlq(
    question: str,
    graph: GraphStore,
    client: Optional[LlmClient],
    schema: Optional[SchemaDescriptor] = None,
    few_shot: Sequence[Tuple[str, str]] = FEW_SHOT,
    synthesize: bool = True,
) -> NlqOutcome:
    """Generate, run (retrying once on a query error) and synthesize.

    Client transport errors propagate as :class:`LlmError`.
    """
    if client is None:
        raise NlqError("an LLM client is required for NLQ answering")
    t0 = time.perf_counter()
    schema = schema if schema is not None else derive_schema(graph)
    base = build_prompt(schema, question, few_shot).text
    out = NlqOutcome(question)
    prompt = base
    for attempt in range(2):
        comp = client.complete(prompt, temperature=0.0)
        out.prompt_tokens += comp.prompt_tokens
        out.completion_tokens += comp.completion_tokens
        query = extract_cypher(comp.text)
        att = Attempt(prompt, comp.text, query)
        out.attempts.append(att)
        if is_unsupported(query):
            out.unsupported = True
            out.failure = "model declined: question needs a graph algorithm"
            break
        try:
            out.result = run_readonly(graph, query)
        except CypherError as exc:
            att.error = str(exc)
            logger.info("nlq attempt %d failed: %s", attempt + 1, exc)
            if attempt == 0:
                prompt = retry_prompt(base, query, att.error)
                continue
            out.failure = "both attempts failed: " + " | ".join(out.errors)
            break
        out.ok = True
        break
    if out.ok and out.result is not None:
        if synthesize:
            out.answer, out.synthesis_prompt = synthesize_answer(question, out.result, client)
        else:
            out.answer = fallback_answer(out.result)
    out.latency_ms = (time.perf_counter() - t0) * 1000.0
    return out


def synthesis_prompt(question: str, table: ResultTable) -> str:
    shown = table.render(max_rows=MAX_SYNTHESIS_ROWS)
    note = ""
    if len(table.rows) > MAX_SYNTHESIS_ROWS:
        note = f"\n(truncated: showing {MAX_SYNTHESIS_ROWS} of {len(table.rows)} rows)"
    return (
        "Answer the question using only the query result below. "
        "Do not add facts that are not in the result.\n\n"
        f"Question: {question}\n\nResult:\n{shown}{note}\n"
    )


def fallback_answer(table: ResultTable) -> str:
    if not table.rows:
        return "No matching records were found."
    if len(table.rows) == 1 and len(table.columns) == 1:
        return table.render().splitlines()[-1].strip()
    extra = ""
    if len(table.rows) > MAX_SYNTHESIS_ROWS:
        extra = f"\n(showing {MAX_SYNTHESIS_ROWS} of {len(table.rows)} rows)"
    return f"{len(table.rows)} rows:\n{table.render(max_rows=MAX_SYNTHESIS_ROWS)}{extra}"


def synthesize_answer(
    question: str, table: ResultTable, client: Optional[LlmClient]
) -> Tuple[str, Optional[str]]:
    """(answer text, synthesis prompt or None when the fallback renderer ran)."""
    if not table.rows or client is None:
        return fallback_answer(table), None
    prompt = synthesis_prompt(question, table)
    try:
        comp = client.complete(prompt, temperature=0.0)
    except LlmError as exc:
        logger.info("synthesis failed, using table rendering: %s", exc)
        return fallback_answer(table), prompt
    text = comp.text.strip()
    return (text or fallback_answer(table)), prompt
