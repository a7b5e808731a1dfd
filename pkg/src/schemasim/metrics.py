"""Trace I/O and metrics computed from a trace alone."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable, Optional, Union

from .geometry import FieldGeometry, ROLE_SECTORS, sector_of
from .vec import Vec2


class TraceError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def dumps_record(record: dict[str, Any]) -> str:
    # json uses repr() for floats: shortest round-trip decimal, platform independent
    return json.dumps(record, separators=(",", ":"), allow_nan=False)


def write_trace(trace: Iterable[dict[str, Any]], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in trace:
            fh.write(dumps_record(rec))
            fh.write("\n")


def trace_bytes(trace: Iterable[dict[str, Any]]) -> bytes:
    return "".join(dumps_record(r) + "\n" for r in trace).encode("utf-8")


_ROBOT_KEYS = ("id", "x", "y", "vx", "vy", "state", "gripper")


def _check_record(rec: Any, lineno: int, first: bool) -> None:
    if not isinstance(rec, dict):
        raise TraceError("record is not an object", lineno)
    if not isinstance(rec.get("tick"), int):
        raise TraceError("missing integer 'tick'", lineno)
    robots = rec.get("robots")
    if not isinstance(robots, list):
        raise TraceError("missing 'robots' list", lineno)
    for r in robots:
        if not isinstance(r, dict) or any(k not in r for k in _ROBOT_KEYS):
            raise TraceError("robot entry lacks required keys", lineno)
    if not isinstance(rec.get("events", []), list):
        raise TraceError("'events' must be a list", lineno)
    if first and not isinstance(rec.get("header"), dict):
        raise TraceError("first record must carry a 'header'", lineno)


def read_trace(path: Union[str, Path], allow_empty: bool = False) -> list[dict[str, Any]]:
    """Load and schema-check a JSON-Lines trace; errors name the first bad line."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceError(f"invalid JSON ({exc.msg})", lineno) from None
            _check_record(rec, lineno, first=not records)
            if records and rec["tick"] < records[-1]["tick"]:
                raise TraceError("tick decreases", lineno)
            records.append(rec)
    if not records and not allow_empty:
        raise TraceError("empty trace")
    return records


def _foraging_metrics(trace: list[dict[str, Any]], header: dict[str, Any]) -> dict[str, Any]:
    total = len(header.get("attractors", []))
    deliveries = {"red": 0, "blue": 0}
    completion = 0 if total == 0 else None
    delivered = 0
    for rec in trace:
        for ev in rec.get("events", []):
            if ev.get("type") == "deliver":
                deliveries[ev["color"]] = deliveries.get(ev["color"], 0) + 1
                delivered += 1
                if delivered == total and completion is None:
                    completion = rec["tick"]
    return {"completion_tick": completion, "deliveries": deliveries, "delivered": delivered, "attractors": total}


def _soccer_metrics(trace: list[dict[str, Any]], header: dict[str, Any]) -> dict[str, Any]:
    dt = header["dt"]
    geom = FieldGeometry(header["field"]["width"], header["field"]["height"])
    roster = {r["id"]: r for r in header["roster"]}
    goals = {"red": 0, "blue": 0}
    possession = {"red": 0, "blue": 0}
    inside = {rid: 0 for rid in roster}
    steps = [rec for rec in trace if rec["tick"] > 0]
    for rec in steps:
        for ev in rec.get("events", []):
            if ev.get("type") == "goal":
                goals[ev["team"]] += 1
        ball = rec.get("ball")
        if ball is not None and rec["robots"]:
            nearest = min(rec["robots"], key=lambda r: (math.hypot(r["x"] - ball["x"], r["y"] - ball["y"]), r["id"]))
            possession[roster[nearest["id"]]["team"]] += 1
        for r in rec["robots"]:
            info = roster[r["id"]]
            if sector_of(Vec2(r["x"], r["y"]), geom, info["team"]) in ROLE_SECTORS[info["role"]]:
                inside[r["id"]] += 1
    n = len(steps)
    occupancy = {
        f"{roster[rid]['team']}/{roster[rid]['role']}/{rid}": (inside[rid] / n if n else 0.0) for rid in sorted(roster)
    }
    return {
        "goals": goals,
        "possession_time": {t: possession[t] * dt for t in possession},
        "sector_occupancy": occupancy,
    }


def compute_metrics(trace: list[dict[str, Any]]) -> dict[str, Any]:
    header = trace[0]["header"]
    distances: dict[str, float] = {}
    prev: dict[int, tuple[float, float]] = {}
    for rec in trace:
        for r in rec["robots"]:
            if r["id"] in prev:
                px, py = prev[r["id"]]
                distances[str(r["id"])] = distances.get(str(r["id"]), 0.0) + math.hypot(r["x"] - px, r["y"] - py)
            else:
                distances.setdefault(str(r["id"]), 0.0)
            prev[r["id"]] = (r["x"], r["y"])
    out: dict[str, Any] = {"kind": header["kind"], "ticks": trace[-1]["tick"], "distance": distances}
    if header["kind"] == "foraging":
        out.update(_foraging_metrics(trace, header))
    else:
        out.update(_soccer_metrics(trace, header))
    return out
