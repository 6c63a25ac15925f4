"""Expected answers for the custom-40 suite, computed by the raw-file oracles.

``build(directory)`` returns the 40 scenario records; the shipped
``assetgraph/data/custom40.jsonl`` is this output frozen to disk and a test
keeps the two in sync.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List

from assetgraph.vector import HashingEmbedder

import oracles as O


def _rec(sid: str, category: str, question: str, expects: Dict) -> Dict:
    return {"id": sid, "category": category, "question": question, "expects": expects, "deterministic": True}


def _set(values) -> Dict:
    return {"kind": "set", "values": sorted(values)}


def _exact(value) -> Dict:
    return {"kind": "exact", "value": value}


def build(directory: Path) -> List[Dict]:
    fx = O.RawFixture.read(directory)
    emb = HashingEmbedder().embed
    n = fx.name
    out: List[Dict] = []

    # multi-hop dependency (8)
    mh = "multi_hop_dependency"
    names = lambda ids: [n(i) for i in ids]
    out += [
        _rec("mh-01", mh, "What equipment is affected if Chiller 6 fails?", _set(names(O.affected_by_failure(fx, "CWC04006")))),
        _rec("mh-02", mh, "What equipment is affected if Chiller 5 fails?", _set(names(O.affected_by_failure(fx, "CWC04005")))),
        _rec("mh-03", mh, "If Chiller 7 fails, what is impacted downstream?", _set(names(O.affected_by_failure(fx, "CWC04007")))),
        _rec("mh-04", mh, "Which equipment is directly affected if Chiller 5 fails?",
             _set(names(O.affected_by_failure(fx, "CWC04005", depth=1)))),
        _rec("mh-05", mh, "What does AHU 2 depend on?", _set(names(O.depends_on(fx, "AHU01002")))),
        _rec("mh-06", mh, "How many equipment are affected if Chiller 5 fails?",
             _exact(len(O.affected_by_failure(fx, "CWC04005")))),
        _rec("mh-07", mh, "What is upstream of AHU 1?", _set(names(O.depends_on(fx, "AHU01001")))),
        _rec("mh-08", mh, "What equipment is affected if Chiller 9 fails?", _set(names(O.affected_by_failure(fx, "CWC04009")))),
    ]

    # cross-asset correlation (6)
    cc = "cross_asset_correlation"
    ahu = set(fx.ids_of_type("air handling unit"))
    chillers = set(fx.ids_of_type("chiller"))
    drop = "temperature drop"
    corr = O.correlation
    f = O.event_filter
    out += [
        _rec("cc-01", cc, "Are AHU anomalies correlated with chiller temperature drops?",
             _exact(corr(fx, f(ahu, "anomaly"), f(chillers, contains=drop), 12))),
        _rec("cc-02", cc, "Are AHU 1 anomalies correlated with Chiller 6 temperature drops?",
             _exact(corr(fx, f({"AHU01001"}, "anomaly"), f({"CWC04006"}, contains=drop), 12))),
        _rec("cc-03", cc, "Are AHU 2 anomalies correlated with Chiller 7 temperature drops?",
             _exact(corr(fx, f({"AHU01002"}, "anomaly"), f({"CWC04007"}, contains=drop), 12))),
        _rec("cc-04", cc, "Are Chiller 3 alerts correlated with Chiller 1 anomalies?",
             _exact(corr(fx, f({"CWC04003"}, "alert"), f({"CWC04001"}, "anomaly"), 12))),
        _rec("cc-05", cc, "Are AHU anomalies correlated with chiller temperature drops within 6 hours?",
             _exact(corr(fx, f(ahu, "anomaly"), f(chillers, contains=drop), 6))),
        _rec("cc-06", cc, "Are Chiller 6 failures correlated with compressor current spikes?",
             _exact(corr(fx, f({"CWC04006"}, corrective=True), f(None, contains="compressor current spike"), 12))),
    ]

    # failure similarity (6)
    fs = "failure_similarity"
    out += [
        _rec("fs-01", fs, "Which failure modes are similar to Refrigerant Leak?",
             _exact(O.similar_failure_modes(fx, emb, "Refrigerant Leak", 3))),
        _rec("fs-02", fs, "Which failure modes resemble Bearing Wear?",
             _exact(O.similar_failure_modes(fx, emb, "Bearing Wear", 3))),
        _rec("fs-03", fs, "Find the 2 most similar failure modes to Filter Clogging.",
             _exact(O.similar_failure_modes(fx, emb, "Filter Clogging", 2))),
        _rec("fs-04", fs, "Which chillers had failures similar to Chiller 6?",
             _exact(O.similar_equipment(fx, emb, "CWC04006", 3, sorted(chillers)))),
        _rec("fs-05", fs, "Which equipment failed in ways similar to AHU 1?",
             _exact(O.similar_equipment(fx, emb, "AHU01001", 3))),
        _rec("fs-06", fs, "Which AHUs had failures similar to AHU 2?",
             _exact(O.similar_equipment(fx, emb, "AHU01002", 3, sorted(ahu)))),
    ]

    # criticality (5)
    cr = "criticality"
    rank = O.criticality_ranking(fx)
    out += [
        _rec("cr-01", cr, "Rank all equipment by operational criticality", _exact([n(i) for i, _ in rank])),
        _rec("cr-02", cr, "Which equipment is most critical?", _exact([n(rank[0][0])])),
        _rec("cr-03", cr, "What are the top 3 most critical equipment?", _exact([n(i) for i, _ in rank[:3]])),
        _rec("cr-04", cr, "Rank the chillers by criticality.", _exact([n(i) for i, _ in rank if i in chillers])),
        _rec("cr-05", cr, "Show the criticality scores for all equipment.", {"kind": "check", "check": "descending_ranking"}),
    ]

    # maintenance optimization (5): fronts are checked structurally
    mo = "maintenance_optimization"
    front = {"kind": "check", "check": "pareto_front"}
    out += [
        _rec("mo-01", mo, "Schedule maintenance minimizing downtime + cost", front),
        _rec("mo-02", mo, "Schedule the pending maintenance for Chiller 6 and Chiller 7 to minimize downtime and cost.", front),
        _rec("mo-03", mo, "Find Pareto-optimal maintenance schedules over a 5 day horizon.", front),
        _rec("mo-04", mo, "Optimize maintenance timing for AHU 1 and AHU 2 to minimize downtime.", front),
        _rec("mo-05", mo, "Schedule maintenance for Chiller 5 and Chiller 6 with minimal outage and cost.", front),
    ]

    # root cause (5)
    rc = "root_cause"
    ahu2_wo = _first_corrective_with_history(fx, "AHU01002", 2023)
    out += [
        _rec("rc-01", rc, "Trace events leading to WO-2024-0042", _set(O.preceding_events(fx, "WO-2024-0042", 72))),
        _rec("rc-02", rc, "What is the root cause of WO-2024-0042?", _set(O.preceding_events(fx, "WO-2024-0042", 72))),
        _rec("rc-03", rc, "What events preceded WO-2024-0042 within 24 hours?",
             _set(O.preceding_events(fx, "WO-2024-0042", 24))),
        _rec("rc-04", rc, "Trace events leading to WO-2024-0042 over the previous 48 hours",
             _set(O.preceding_events(fx, "WO-2024-0042", 48))),
        _rec("rc-05", rc, f"What is the root cause of {ahu2_wo}?", _set(O.preceding_events(fx, ahu2_wo, 72))),
    ]

    # temporal pattern (5)
    tp = "temporal"
    out += [
        _rec("tp-01", tp, "What is MTBF for Chiller 6's compressor?", _exact(O.mtbf_hours(fx, "CWC04006", "compressor"))),
        _rec("tp-02", tp, "What is the mean time between failures for Chiller 3 in 2020?",
             _exact(O.mtbf_hours(fx, "CWC04003", years=(2020, 2020)))),
        _rec("tp-03", tp, "What is the MTBF of AHU 1?", _exact(O.mtbf_hours(fx, "AHU01001"))),
        _rec("tp-04", tp, "What is the average time between failures of Chiller 2 between 2018 and 2020?",
             _exact(O.mtbf_hours(fx, "CWC04002", years=(2018, 2020)))),
        _rec("tp-05", tp, "What is the MTBF for Chiller 1's bearing failures?", _exact(O.mtbf_hours(fx, "CWC04001", "bearing"))),
    ]
    return out


def _first_corrective_with_history(fx: O.RawFixture, eq: str, year: int) -> str:
    for e in fx.events:
        if (e["equipment_id"] == eq and e["kind"] == "work_order" and e["wo_type"] == "corrective"
                and e["timestamp"].startswith(str(year)) and O.preceding_events(fx, e["event_id"], 72)):
            return e["event_id"]
    raise RuntimeError("fixture has no suitable work order")
