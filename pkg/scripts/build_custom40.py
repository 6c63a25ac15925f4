"""Regenerate assetgraph/data/custom40.jsonl from the oracle computations."""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from assetgraph.etl import write_fixture  # noqa: E402
from custom40_oracle import build  # noqa: E402


def render(records) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        write_fixture(tmp)
        text = render(build(Path(tmp)))
    out = ROOT / "src" / "assetgraph" / "data" / "custom40.jsonl"
    out.write_text(text, encoding="utf-8")
    print(f"wrote {out} ({text.count(chr(10))} scenarios)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
