"""Trace serialization: JSON-Lines, one step per line, floats at 3 decimals.

The final line is a termination record {"end": {...}}; replaying a file
without one raises IncompleteTrace.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from udrive.scene import (
    EgoView,
    Event,
    IntersectionView,
    ObstacleView,
    PlannerView,
    Scene,
    SegmentView,
    SignalView,
    TraceStep,
    WeatherView,
)
from udrive.sim import Trace


class IncompleteTrace(Exception):
    pass


class CorruptTrace(Exception):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _r(x: float) -> float:
    return round(float(x), 3)


def _opt(x: Optional[float]):
    return None if x is None else _r(x)


def _event_obj(event: Event):
    if event.arg is None:
        return event.id
    return {"id": event.id, "arg": _r(event.arg)}


def _value_obj(value):
    if isinstance(value, tuple):
        return [_r(value[0]), _r(value[1])]
    if isinstance(value, float):
        return _r(value)
    return value


def step_to_obj(step: TraceStep) -> dict:
    scene = step.scene
    return {
        "tick": step.tick,
        "time": _r(scene.time),
        "scene": {
            "weather": {
                "raining": scene.weather.raining,
                "foggy": scene.weather.foggy,
                "snowing": scene.weather.snowing,
                "light_level": _r(scene.weather.light_level),
            },
            "ego": {
                "position": _r(scene.ego.position),
                "lane": scene.ego.lane,
                "speed": _r(scene.ego.speed),
                "accel": _r(scene.ego.accel),
                "maneuver": scene.ego.maneuver,
            },
            "segment": {
                "kind": scene.segment.kind,
                "speed_limit": _r(scene.segment.speed_limit),
                "lanes": scene.segment.lanes,
                "jam": scene.segment.jam,
                "fast_lane_min": _opt(scene.segment.fast_lane_min),
            },
            "obstacles": [
                {
                    "kind": o.kind,
                    "distance": _r(o.distance),
                    "lane": o.lane,
                    "speed": _r(o.speed),
                }
                for o in scene.obstacles
            ],
            "signals": [
                {
                    "sid": s.sid,
                    "kind": s.kind,
                    "distance": _r(s.distance),
                    "value": _opt(s.value),
                }
                for s in scene.signals
            ],
            "next_intersection": None
            if scene.next_intersection is None
            else {
                "distance": _r(scene.next_intersection.distance),
                "length": _r(scene.next_intersection.length),
                "jam": scene.next_intersection.jam,
                "signalized": scene.next_intersection.signalized,
            },
        },
        "events": sorted((_event_obj(e) for e in step.events), key=_event_sort_key),
        "params": {key: _value_obj(step.params[key]) for key in sorted(step.params)},
        "active_rules": list(step.active_rules),
        "rejected_rules": list(step.rejected_rules),
        "planner": {
            "target_speed": _r(step.planner.target_speed),
            "commanded_accel": _r(step.planner.commanded_accel),
            "lane_command": step.planner.lane_command,
            "stop_point": _opt(step.planner.stop_point),
            "light_state": step.planner.light_state,
            "horn": step.planner.horn,
        },
    }


def _event_sort_key(obj):
    if isinstance(obj, str):
        return (obj, 0.0)
    return (obj["id"], obj["arg"])


def step_from_obj(obj: dict) -> TraceStep:
    raw_scene = obj["scene"]
    events = set()
    for entry in obj["events"]:
        if isinstance(entry, str):
            events.add(Event(entry))
        else:
            events.add(Event(entry["id"], entry["arg"]))
    params = {}
    for key, value in obj["params"].items():
        params[key] = tuple(value) if isinstance(value, list) else value
    ix = raw_scene.get("next_intersection")
    scene = Scene(
        time=obj["time"],
        weather=WeatherView(**raw_scene["weather"]),
        ego=EgoView(**raw_scene["ego"]),
        segment=SegmentView(**raw_scene["segment"]),
        obstacles=tuple(ObstacleView(**o) for o in raw_scene["obstacles"]),
        signals=tuple(SignalView(**s) for s in raw_scene["signals"]),
        next_intersection=None if ix is None else IntersectionView(**ix),
    )
    planner = PlannerView(**obj["planner"])
    return TraceStep(
        tick=obj["tick"],
        scene=scene,
        events=frozenset(events),
        params=params,
        active_rules=tuple(obj["active_rules"]),
        planner=planner,
        rejected_rules=tuple(obj.get("rejected_rules", ())),
    )


def write_trace(trace: Trace, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for step in trace.steps:
            fh.write(json.dumps(step_to_obj(step), separators=(",", ":")) + "\n")
        end = {"end": {"reason": trace.reason, "ticks": trace.ticks, "scenario": trace.scenario_name}}
        fh.write(json.dumps(end, separators=(",", ":")) + "\n")


def read_trace(path: str | Path) -> Trace:
    path = Path(path)
    steps = []
    end = None
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptTrace(line_no, f"bad JSON ({exc.msg})") from exc
            if "end" in obj:
                end = obj["end"]
                continue
            try:
                steps.append(step_from_obj(obj))
            except (KeyError, TypeError) as exc:
                raise CorruptTrace(line_no, f"bad trace step ({exc})") from exc
    if end is None:
        raise IncompleteTrace("trace file has no termination record")
    trace = Trace(steps=steps, reason=end["reason"], scenario_name=end.get("scenario", ""))
    return trace
