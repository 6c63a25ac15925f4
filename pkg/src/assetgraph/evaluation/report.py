"""Report emitters: JSON, aligned text table and CSV."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import List, Union

from .runner import SuiteReport
from .scoring import DIMENSIONS

FORMATS = ("json", "table", "csv")


def to_json(report: SuiteReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def from_json(text: str) -> SuiteReport:
    return SuiteReport.from_dict(json.loads(text))


def to_table(report: SuiteReport) -> str:
    header = ["Category", "Pass", "Total", "Rate", "Avg score", "Avg latency (ms)"]
    rows: List[List[str]] = []
    stats = report.categories() + [report.overall()]
    for s in stats:
        rate = f"{100.0 * s.passed / s.total:.0f}%" if s.total else "n/a"
        name = "Total" if s.category == "total" else s.category
        if s.judge_required:
            name += f" (+{s.judge_required} judge)"
        rows.append([name, str(s.passed), str(s.total), rate, f"{s.avg_score:.3f}", f"{s.avg_latency_ms:.1f}"])
    widths = [max(len(r[i]) for r in rows + [header]) for i in range(len(header))]

    def line(cells: List[str]) -> str:
        return "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths)))

    out = [f"tier: {report.tier}  threshold: {report.threshold:g}", line(header), "  ".join("-" * w for w in widths)]
    out.extend(line(r) for r in rows[:-1])
    out.append("  ".join("-" * w for w in widths))
    out.append(line(rows[-1]))
    return "\n".join(out) + "\n"


def to_csv(report: SuiteReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scenario_id", "category", "tier", "handler", "latency_ms", "total", "passed", "judge_required"]
               + list(DIMENSIONS))
    for r in report.rows:
        c = r.card
        w.writerow([r.scenario_id, r.category, r.tier, r.handler or "", f"{r.latency_ms:.3f}", f"{c.total:.6f}",
                    int(c.passed), int(c.judge_required)] + [f"{c.scores[d]:.6f}" for d in DIMENSIONS])
    return buf.getvalue()


def render(report: SuiteReport, fmt: str) -> str:
    if fmt == "json":
        return to_json(report)
    if fmt == "table":
        return to_table(report)
    if fmt == "csv":
        return to_csv(report)
    raise ValueError(f"format must be one of {', '.join(FORMATS)}")


def write_report(report: SuiteReport, path: Union[str, Path], fmt: str = "json") -> None:
    Path(path).write_text(render(report, fmt), encoding="utf-8")
