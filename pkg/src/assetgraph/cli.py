"""Command-line entry point: ``assetgraph <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .cypher import CypherError, run
from .etl import EtlFatalError, SourceBundle, build_graph, write_fixture
from .gak import REJECTED, GapKey, canonicalize, enrich
from .graph import snapshot
from .llm import HttpLlmClient, LlmClient, LlmError, StubLlmClient

logger = logging.getLogger("assetgraph")

BUNDLE_OPTIONS = ("hierarchy", "sensors", "fmsr", "events", "topology", "rules", "readings")


def _client(args: argparse.Namespace, required: bool = False) -> Optional[LlmClient]:
    """Stub client from ``--playbook``, else HTTP if LLM_ENDPOINT is set."""
    if getattr(args, "playbook", None):
        return StubLlmClient(args.playbook)
    try:
        return HttpLlmClient(model=getattr(args, "model", None) or "default")
    except LlmError:
        if required:
            raise
        return None


def cmd_etl(args: argparse.Namespace) -> int:
    if args.source_dir:
        bundle = SourceBundle.from_dir(args.source_dir)
    else:
        bundle = SourceBundle()
    for name in BUNDLE_OPTIONS:
        if getattr(args, name):
            setattr(bundle, name, Path(getattr(args, name)))
    missing = [n for n in ("hierarchy", "sensors", "fmsr", "events", "topology") if getattr(bundle, n) is None]
    if missing:
        print(f"error: missing source files: {', '.join(missing)}", file=sys.stderr)
        return 2
    try:
        graph, report = build_graph(bundle)
    except EtlFatalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    snapshot.save(graph, args.out)
    print(json.dumps({k: v for k, v in report.to_dict().items() if k != "steps"}, indent=2, sort_keys=True))
    return 0 if not report.rejected or not args.strict else 1


def cmd_fixture(args: argparse.Namespace) -> int:
    bundle = write_fixture(args.dir, seed=args.seed, with_telemetry=args.telemetry)
    for name, path in bundle.paths().items():
        print(f"{name}: {path}")
    if args.snapshot:
        graph, report = build_graph(bundle)
        snapshot.save(graph, args.snapshot)
        print(f"snapshot: {args.snapshot} ({graph.node_count} nodes, {graph.edge_count} edges)")
    return 0


def cmd_ask(args: argparse.Namespace) -> int:
    from .router import Router, Workspace

    ws = Workspace.load(args.snapshot, _client(args))
    ans = Router(ws).answer(args.question, tier=args.tier)
    if ans.enrichment_id and args.save:
        ws.save(args.snapshot)
    if args.json:
        print(ans.to_json())
    else:
        print(ans.text)
        if args.trace:
            for t in ans.trace:
                print(f"  | {t}")
        print(f"[{ans.tier}, {ans.latency_ms:.1f} ms]")
    return 1 if ans.refused else 0


def cmd_query(args: argparse.Namespace) -> int:
    graph = snapshot.load(args.snapshot).graph
    try:
        table = run(graph, args.cypher)
    except CypherError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(table.render())
    return 0


def cmd_enrich(args: argparse.Namespace) -> int:
    from .router import Workspace

    try:
        client = _client(args, required=True)
    except LlmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    ws = Workspace.load(args.snapshot, client)
    rec = enrich(GapKey(canonicalize(args.gap)), client, ws.graph, ws.cache, ws.embedder, ws.index)
    print(json.dumps(rec.to_dict(), indent=2, sort_keys=True))
    if rec.status == REJECTED:
        return 1
    ws.save(args.snapshot)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    from .evaluation import HttpJudge, SuiteError, custom40_path, load_scenarios, render, run_suite, write_report

    scenarios = load_scenarios(custom40_path() if args.suite == "custom40" else args.suite)
    judge = HttpJudge(args.judge) if args.judge else None
    try:
        report = run_suite(scenarios, args.tier, args.snapshot, _client(args), judge, args.threshold, args.workers)
    except SuiteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.report:
        write_report(report, args.report, args.format)
    sys.stdout.write(render(report, "table" if args.report else args.format))
    return 0 if report.all_passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="assetgraph", description="Asset graph engine and tiered question answering.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("etl", help="build a snapshot from source files")
    e.add_argument("--source-dir", help="directory holding conventionally named source files")
    for name in BUNDLE_OPTIONS:
        e.add_argument(f"--{name}", help=f"{name} source file")
    e.add_argument("--out", required=True, help="snapshot path to write")
    e.add_argument("--strict", action="store_true", help="exit 1 when any record is rejected")
    e.set_defaults(fn=cmd_etl)

    f = sub.add_parser("fixture", help="write the reference fixture files")
    f.add_argument("--dir", required=True)
    f.add_argument("--seed", type=int, default=7)
    f.add_argument("--telemetry", action="store_true", help="also write rules and readings")
    f.add_argument("--snapshot", help="also build and save a snapshot here")
    f.set_defaults(fn=cmd_fixture)

    a = sub.add_parser("ask", help="answer one question")
    a.add_argument("question")
    a.add_argument("--snapshot", required=True)
    a.add_argument("--tier", choices=("auto", "det", "nlq", "gak"), default="auto")
    a.add_argument("--json", action="store_true", help="print the answer envelope as JSON")
    a.add_argument("--trace", action="store_true", help="print the trace under the answer")
    a.add_argument("--save", action="store_true", help="write enrichment back into the snapshot")
    a.set_defaults(fn=cmd_ask)

    q = sub.add_parser("query", help="run a Cypher query")
    q.add_argument("cypher")
    q.add_argument("--snapshot", required=True)
    q.set_defaults(fn=cmd_query)

    g = sub.add_parser("enrich", help="pre-enrich one knowledge gap")
    g.add_argument("--gap", required=True, help='equipment type, e.g. "electric motor"')
    g.add_argument("--snapshot", required=True)
    g.set_defaults(fn=cmd_enrich)

    v = sub.add_parser("eval", help="run a scenario suite")
    v.add_argument("--suite", required=True, help='scenario JSON-lines file, or "custom40" for the shipped suite')
    v.add_argument("--snapshot", required=True)
    v.add_argument("--tier", choices=("det", "nlq", "gak"), default="det")
    v.add_argument("--report", help="write the report here")
    v.add_argument("--format", choices=("json", "table", "csv"), default="table")
    v.add_argument("--judge", help="HTTP endpoint of a rubric judge")
    v.add_argument("--threshold", type=float, default=0.7)
    v.add_argument("--workers", type=int, default=1)
    v.set_defaults(fn=cmd_eval)

    for sp in (a, g, v):
        sp.add_argument("--playbook", help="YAML playbook for the stub LLM client")
        sp.add_argument("--model", help="model name sent to the HTTP LLM endpoint")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except (OSError, snapshot.SnapshotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
