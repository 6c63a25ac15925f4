"""Deterministic generator for the chiller/AHU demonstration bundle.

The bundle mirrors the published portfolio shape: 1 site, 4 locations,
11 equipment (9 chillers, 2 AHUs), 10 sensors each, 12 failure modes and
6,256 events between 2017 and mid-2024. Values are synthetic and seeded.
A few events are pinned so that documented example questions have stable
answers: CWC04009 has exactly three events (all in 2019), WO-2024-0042 is
a corrective Chiller 6 work order preceded by three warning events, and
six open work orders await scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import yaml

from ..graph.values import format_timestamp
from .sources import SourceBundle

PathLike = Union[str, Path]

TOTAL_EVENTS = 6256
START = datetime(2017, 1, 1, tzinfo=timezone.utc)
END = datetime(2024, 6, 20, tzinfo=timezone.utc)

SITE = ("SITE-01", "Main Data Center")
LOCATIONS = [
    ("LOC-MECH", "Mechanical"),
    ("LOC-ELEC", "Electrical"),
    ("LOC-HVAC", "HVAC"),
    ("LOC-UTIL", "Utility"),
]

CHILLERS = [(f"CWC0400{k}", f"Chiller {k}", "LOC-MECH" if k <= 4 else "LOC-UTIL") for k in range(1, 10)]
AHUS = [("AHU01001", "AHU 1", "LOC-HVAC"), ("AHU01002", "AHU 2", "LOC-HVAC")]

CHILLER_SENSORS = [
    ("Supply Water Temperature", "temperature", "degC", 2.0, 15.0),
    ("Return Water Temperature", "temperature", "degC", 5.0, 20.0),
    ("Condenser Water Temperature", "temperature", "degC", 15.0, 40.0),
    ("Evaporator Pressure", "pressure", "kPa", 200.0, 500.0),
    ("Condenser Pressure", "pressure", "kPa", 600.0, 1400.0),
    ("Compressor Current", "current", "A", 0.0, 600.0),
    ("Power Input", "power", "kW", 0.0, 1200.0),
    ("Chiller Efficiency", "efficiency", "kW/ton", 0.3, 1.2),
    ("Cooling Load", "load", "ton", 0.0, 1500.0),
    ("Compressor Vibration", "vibration", "mm/s", 0.0, 12.0),
]
AHU_SENSORS = [
    ("Supply Air Temperature", "air temperature", "degC", 8.0, 30.0),
    ("Return Air Temperature", "air temperature", "degC", 15.0, 35.0),
    ("Mixed Air Temperature", "air temperature", "degC", 5.0, 35.0),
    ("Supply Air Humidity", "humidity", "%RH", 10.0, 90.0),
    ("Duct Static Pressure", "static pressure", "Pa", 0.0, 1000.0),
    ("Supply Airflow", "airflow", "m3/h", 0.0, 60000.0),
    ("Outside Air Damper Position", "damper position", "%", 0.0, 100.0),
    ("Filter Differential Pressure", "differential pressure", "Pa", 0.0, 500.0),
    ("Cooling Valve Position", "valve position", "%", 0.0, 100.0),
    ("Power Input", "power", "kW", 0.0, 150.0),
]

FAILURE_MODES: List[Tuple[str, str, List[str], str]] = [
    ("Compressor Overheating", "Discharge temperature rises above limits due to overload, poor lubrication or high head pressure.", ["temperature", "current", "power"], "chiller"),
    ("Refrigerant Leak", "Loss of refrigerant through seals or tubing, reducing suction pressure and capacity.", ["pressure", "temperature"], "chiller"),
    ("Condenser Fouling", "Scale or debris on condenser tubes raises condensing pressure and energy use.", ["pressure", "temperature", "efficiency"], "chiller"),
    ("Evaporator Fouling", "Deposits on evaporator tubes reduce heat transfer and chilled water delta-T.", ["temperature", "pressure", "efficiency"], "chiller"),
    ("Low Refrigerant Charge", "Insufficient charge causes low evaporator pressure and reduced cooling load.", ["pressure", "load"], "chiller"),
    ("Chilled Water Flow Loss", "Reduced chilled water flow trips the unit and raises supply water temperature.", ["temperature", "load"], "chiller"),
    ("Bearing Wear", "Degraded compressor bearings raise vibration and running current.", ["vibration", "current"], "chiller"),
    ("Excessive Vibration", "Misalignment or looseness produces vibration above acceptable levels.", ["vibration"], "chiller"),
    ("Electrical Insulation Breakdown", "Winding insulation degradation causes current imbalance and power anomalies.", ["current", "power"], "chiller"),
    ("Filter Clogging", "Loaded filters raise differential pressure and cut supply airflow.", ["differential pressure", "airflow"], "ahu"),
    ("Cooling Coil Freezing", "Low coil temperatures freeze condensate and block airflow.", ["air temperature", "valve position"], "ahu"),
    ("Damper Actuator Failure", "A stuck or failed damper actuator leaves the outside air damper out of position.", ["damper position", "airflow"], "ahu"),
]

ALERTS = {
    "chiller": ["Supply water temperature drop", "High condenser pressure", "Compressor current spike", "Low evaporator pressure"],
    "ahu": ["Supply air temperature deviation", "Filter differential pressure high", "Low supply airflow"],
}

TOPOLOGY = [
    {"from": "AHU01001", "rel": "DEPENDS_ON", "to": "CWC04006"},
    {"from": "AHU01002", "rel": "DEPENDS_ON", "to": "CWC04006"},
    {"from": "AHU01002", "rel": "DEPENDS_ON", "to": "CWC04007"},
    {"from": "CWC04006", "rel": "DEPENDS_ON", "to": "CWC04005"},
    {"from": "CWC04007", "rel": "DEPENDS_ON", "to": "CWC04005"},
    {"from": "CWC04001", "rel": "SHARES_SYSTEM_WITH", "to": "CWC04002"},
    {"from": "CWC04002", "rel": "SHARES_SYSTEM_WITH", "to": "CWC04003"},
    {"from": "CWC04003", "rel": "SHARES_SYSTEM_WITH", "to": "CWC04004"},
    {"from": "CWC04005", "rel": "SHARES_SYSTEM_WITH", "to": "CWC04006"},
    {"from": "CWC04006", "rel": "SHARES_SYSTEM_WITH", "to": "CWC04007"},
    {"from": "CWC04008", "rel": "SHARES_SYSTEM_WITH", "to": "CWC04009"},
]

# (equipment, created, due, duration hours, cost)
OPEN_WORK_ORDERS = [
    ("CWC04005", "2024-06-21T08:00:00Z", "2024-07-01T08:00:00Z", 8, 3200.0),
    ("CWC04006", "2024-06-22T09:00:00Z", "2024-07-02T08:00:00Z", 6, 2100.0),
    ("CWC04006", "2024-06-23T10:00:00Z", "2024-07-03T08:00:00Z", 4, 900.0),
    ("CWC04007", "2024-06-24T11:00:00Z", "2024-07-02T08:00:00Z", 5, 1500.0),
    ("AHU01001", "2024-06-25T12:00:00Z", "2024-07-01T20:00:00Z", 3, 600.0),
    ("AHU01002", "2024-06-26T13:00:00Z", "2024-07-02T20:00:00Z", 4, 750.0),
]

EVENT_COLUMNS = [
    "event_id", "timestamp", "equipment_id", "kind", "description",
    "failure_mode", "wo_type", "status", "cost", "duration_hours", "due",
]


def _eq_type(eq_id: str) -> str:
    return "ahu" if eq_id.startswith("AHU") else "chiller"


def _csv_text(header: List[str], rows: List[Dict[str, object]]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in header})
    return buf.getvalue()


def _ts(dt: datetime) -> str:
    return format_timestamp(dt)


def _random_time(rng: random.Random) -> datetime:
    span = int((END - START).total_seconds() // 60)
    return START + timedelta(minutes=rng.randrange(span))


def _base_event(rng: random.Random, eq: str, when: datetime) -> Dict[str, object]:
    t = _eq_type(eq)
    r = rng.random()
    ev: Dict[str, object] = {"equipment_id": eq, "timestamp": when}
    if r < 0.35:
        ev["kind"] = "work_order"
        ev["status"] = "closed"
        if rng.random() < 0.4:
            fms = [f for f in FAILURE_MODES if f[3] == t]
            fm = rng.choice(fms)
            ev["wo_type"] = "corrective"
            ev["failure_mode"] = fm[0]
            ev["description"] = f"Corrective repair: {fm[0].lower()}"
            ev["duration_hours"] = float(rng.randint(2, 24))
        else:
            ev["wo_type"] = "preventive"
            ev["description"] = "Scheduled preventive maintenance"
            ev["duration_hours"] = float(rng.randint(1, 8))
        ev["cost"] = float(rng.randint(2, 80) * 50)
    elif r < 0.75:
        ev["kind"] = "alert"
        ev["description"] = rng.choice(ALERTS[t])
    else:
        ev["kind"] = "anomaly"
        sensors = CHILLER_SENSORS if t == "chiller" else AHU_SENSORS
        ev["description"] = f"Anomalous {rng.choice(sensors)[0].lower()} reading"
    return ev


def generate_events(seed: int = 7) -> List[Dict[str, object]]:
    rng = random.Random(seed)
    others = [c[0] for c in CHILLERS if c[0] != "CWC04009"] + [a[0] for a in AHUS]
    pinned_09 = [
        {"equipment_id": "CWC04009", "timestamp": datetime(2019, 2, 11, 6, 30, tzinfo=timezone.utc), "kind": "alert", "description": "High condenser pressure"},
        {"equipment_id": "CWC04009", "timestamp": datetime(2019, 6, 3, 14, 0, tzinfo=timezone.utc), "kind": "work_order", "wo_type": "corrective", "failure_mode": "Refrigerant Leak", "description": "Corrective repair: refrigerant leak", "status": "closed", "cost": 1800.0, "duration_hours": 10.0},
        {"equipment_id": "CWC04009", "timestamp": datetime(2019, 10, 20, 9, 15, tzinfo=timezone.utc), "kind": "work_order", "wo_type": "preventive", "description": "Scheduled preventive maintenance", "status": "closed", "cost": 400.0, "duration_hours": 4.0},
    ]
    n_random = TOTAL_EVENTS - len(pinned_09) - 4 - len(OPEN_WORK_ORDERS)
    events = [_base_event(rng, rng.choice(others), _random_time(rng)) for _ in range(n_random)]

    # many AHU anomalies follow a temperature drop on a chiller they depend on
    feeds = {"AHU01001": ["CWC04006"], "AHU01002": ["CWC04006", "CWC04007"]}
    drops: Dict[str, List[datetime]] = {}
    for ev in events:
        if ev["kind"] == "alert" and ev["description"] == "Supply water temperature drop":
            drops.setdefault(str(ev["equipment_id"]), []).append(ev["timestamp"])  # type: ignore[arg-type]
    for lst in drops.values():
        lst.sort()
    for ev in events:
        eq = str(ev["equipment_id"])
        if ev["kind"] == "anomaly" and eq in feeds and rng.random() < 0.5:
            src = rng.choice(feeds[eq])
            if drops.get(src):
                ev["timestamp"] = rng.choice(drops[src]) + timedelta(minutes=rng.randint(30, 720))
                ev["description"] = "Anomalous supply air temperature reading"
    events.extend(pinned_09)

    # place the root-cause target so it becomes the 42nd work order of 2024
    wo_2024 = sorted(e["timestamp"] for e in events if e["kind"] == "work_order" and e["timestamp"].year == 2024)  # type: ignore[union-attr]
    a, b = wo_2024[40], wo_2024[41]
    target = a + (b - a) / 2
    target = target.replace(second=0, microsecond=0)
    if not a < target < b:
        raise RuntimeError("fixture generation: cannot place WO-2024-0042")
    events.append({"equipment_id": "CWC04006", "timestamp": target, "kind": "work_order", "wo_type": "corrective", "failure_mode": "Compressor Overheating", "description": "Compressor tripped on high discharge temperature", "status": "closed", "cost": 5200.0, "duration_hours": 16.0, "_pin": "WO-2024-0042"})
    for hours, kind, desc in ((50, "alert", "Compressor current spike"), (26, "anomaly", "Anomalous compressor vibration reading"), (4, "alert", "High condenser pressure")):
        events.append({"equipment_id": "CWC04006", "timestamp": target - timedelta(hours=hours), "kind": kind, "description": desc})
    for eq, created, due, dur, cost in OPEN_WORK_ORDERS:
        events.append({"equipment_id": eq, "timestamp": _parse(created), "kind": "work_order", "wo_type": "preventive", "description": "Planned preventive maintenance", "status": "open", "cost": cost, "duration_hours": float(dur), "due": due})

    events.sort(key=lambda e: (e["timestamp"], str(e["equipment_id"]), str(e["kind"]), str(e.get("description"))))
    counters: Dict[Tuple[str, int], int] = {}
    prefix = {"work_order": "WO", "alert": "AL", "anomaly": "AN"}
    width = {"work_order": 4, "alert": 5, "anomaly": 5}
    for ev in events:
        kind = str(ev["kind"])
        year = ev["timestamp"].year  # type: ignore[union-attr]
        k = counters.get((kind, year), 0) + 1
        counters[(kind, year)] = k
        ev["event_id"] = f"{prefix[kind]}-{year}-{k:0{width[kind]}d}"
    pinned = [e for e in events if e.get("_pin")]
    if len(pinned) != 1 or pinned[0]["event_id"] != pinned[0]["_pin"]:
        raise RuntimeError("fixture generation: pinned work order id drifted")
    for ev in events:
        ev.pop("_pin", None)
        ev["timestamp"] = _ts(ev["timestamp"])  # type: ignore[arg-type]
    assert len(events) == TOTAL_EVENTS
    return events


def _parse(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


def hierarchy_rows() -> List[Dict[str, object]]:
    rows: List[Dict[str, object]] = [
        {"kind": "site", "id": SITE[0], "name": SITE[1], "parent": "", "isa95_level": "Site"}
    ]
    for lid, name in LOCATIONS:
        rows.append({"kind": "location", "id": lid, "name": name, "parent": SITE[0], "isa95_level": "Area"})
    for eid, name, loc in CHILLERS:
        rows.append({"kind": "equipment", "id": eid, "name": name, "parent": loc, "isa95_level": "Work Unit", "iso14224_class": "Chiller", "equipment_type": "chiller"})
    for eid, name, loc in AHUS:
        rows.append({"kind": "equipment", "id": eid, "name": name, "parent": loc, "isa95_level": "Work Unit", "iso14224_class": "Air handling unit", "equipment_type": "air handling unit"})
    return rows


def sensor_records() -> List[Dict[str, object]]:
    out = []
    for eid, _, _ in CHILLERS + AHUS:
        table = CHILLER_SENSORS if _eq_type(eid) == "chiller" else AHU_SENSORS
        for k, (name, typ, unit, lo, hi) in enumerate(table, start=1):
            out.append({"sensor_id": f"{eid}-S{k:02d}", "equipment_id": eid, "name": name, "type": typ, "unit": unit, "min": lo, "max": hi})
    return out


def telemetry(seed: int = 7) -> Tuple[List[Dict[str, object]], List[Dict[str, object]]]:
    """Monitoring rules and hourly readings for the rule-logic handler."""
    rng = random.Random(seed + 1)
    rules = [
        {"rule_id": "MR-001", "equipment_id": "CWC04006", "sensor_type": "temperature", "operator": ">", "threshold": 12.0, "description": "Supply water temperature high"},
        {"rule_id": "MR-002", "equipment_id": "CWC04006", "sensor_type": "vibration", "operator": ">", "threshold": 7.1, "description": "Compressor vibration above ISO 10816 zone C"},
        {"rule_id": "MR-003", "equipment_id": "AHU01001", "sensor_type": "differential pressure", "operator": ">", "threshold": 250.0, "description": "Filter differential pressure high"},
    ]
    readings = []
    base = datetime(2024, 6, 1, tzinfo=timezone.utc)
    for sensor_id, lo, hi, spikes in (("CWC04006-S01", 5.0, 8.0, {5: 13.4, 17: 12.6}), ("CWC04006-S10", 1.0, 4.0, {9: 7.8}), ("AHU01001-S08", 80.0, 200.0, {})):
        for h in range(24):
            v = spikes.get(h, round(rng.uniform(lo, hi), 2))
            readings.append({"reading_id": f"{sensor_id}-R{h:02d}", "sensor_id": sensor_id, "timestamp": _ts(base + timedelta(hours=h)), "value": v})
    return rules, readings


def write_fixture(directory: PathLike, seed: int = 7, with_telemetry: bool = False) -> SourceBundle:
    """Write the bundle files into ``directory`` and return the bundle."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "hierarchy.csv").write_text(
        _csv_text(["kind", "id", "name", "parent", "isa95_level", "iso14224_class", "equipment_type"], hierarchy_rows()),
        encoding="utf-8",
    )
    (d / "sensors.json").write_text(json.dumps(sensor_records(), indent=1) + "\n", encoding="utf-8")
    fmsr = [{"name": n, "description": desc, "sensors": s} for n, desc, s, _ in FAILURE_MODES]
    (d / "fmsr.yaml").write_text(yaml.safe_dump(fmsr, sort_keys=False), encoding="utf-8")
    (d / "events.csv").write_text(_csv_text(EVENT_COLUMNS, generate_events(seed)), encoding="utf-8")
    (d / "topology.yaml").write_text(yaml.safe_dump(TOPOLOGY, sort_keys=False), encoding="utf-8")
    if with_telemetry:
        rules, readings = telemetry(seed)
        (d / "rules.yaml").write_text(yaml.safe_dump(rules, sort_keys=False), encoding="utf-8")
        (d / "readings.csv").write_text(_csv_text(["reading_id", "sensor_id", "timestamp", "value"], readings), encoding="utf-8")
    else:
        for name in ("rules.yaml", "readings.csv"):
            if (d / name).exists():
                (d / name).unlink()
    return SourceBundle.from_dir(d)


def fixture_graph(directory: Optional[PathLike] = None, seed: int = 7, with_telemetry: bool = False):
    """Convenience: write the fixture (to a temp dir by default) and build it."""
    import tempfile

    from .pipeline import build_graph

    if directory is None:
        with tempfile.TemporaryDirectory() as tmp:
            return build_graph(write_fixture(tmp, seed, with_telemetry))
    return build_graph(write_fixture(directory, seed, with_telemetry))
