"""Stub playbooks for enrichment tests."""

from __future__ import annotations

from typing import Dict, List

GAP_KEYS = (
    "electric motor", "pump", "fan", "steam turbine", "gas turbine",
    "generator", "transformer", "boiler", "cooling tower", "heat exchanger",
)

MOTOR_MODES = ("Bearing Failure", "Winding Insulation Breakdown", "Rotor Bar Crack", "Shaft Misalignment",
               "Overheating", "Phase Imbalance")


def statements(key: str, modes=None) -> str:
    title = key.title()
    modes = modes or (f"{title} Wear", f"{title} Fouling")
    lines = [f"CREATE (q:Equipment {{name: '{title}', equipment_type: '{key}'}})"]
    for i, m in enumerate(modes):
        lines.append(
            f"CREATE (q:Equipment {{name: '{title} ref {i}', equipment_type: '{key}'}})-[:EXPERIENCED]->"
            f"(f:FailureMode {{name: '{m}', description: '{m} in a {key}'}}), "
            f"(s:Sensor {{name: '{m} sensor', type: 'vibration'}})-[:MONITORS]->(f)"
        )
    return "\n".join(lines)


def covering(keys=GAP_KEYS) -> Dict[str, List[Dict[str, str]]]:
    rules = []
    for k in keys:
        body = statements(k, MOTOR_MODES if k == "electric motor" else None)
        rules.append({"contains": f"Equipment type: {k}\n", "reply": body})
    return {"rules": rules}


REJECTING = {"rules": [{"contains": "Equipment type:", "reply": "MATCH (n) RETURN n\nDELETE everything"}]}
PARTIAL = {"rules": [{"contains": "Equipment type:", "reply": statements("pump") + "\nCREATE (x:Alien {name: 'x'})"}]}
