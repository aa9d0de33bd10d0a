"""Deterministic world description: route segments, signals, obstacles,
weather timeline, and the ego start state.

Files are YAML or JSON; schema violations raise SchemaError with a
JSON-pointer-style path to the offending entry.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from udrive.scene import SEGMENT_KINDS

TICK_S = 0.1

OBSTACLE_KINDS = ("static", "vehicle", "pedestrian")
SIGNAL_KINDS = ("light", "stop_sign", "limit")
LIGHT_COLORS = ("red", "green", "yellow")


class SchemaError(Exception):
    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer


@dataclass(frozen=True)
class Segment:
    kind: str
    length: float
    lanes: int = 1
    speed_limit: float = 60.0
    jam_windows: tuple[tuple[float, float], ...] = ()
    fast_lane_min: Optional[float] = None

    def jam_at(self, t: float) -> bool:
        return any(lo <= t < hi for lo, hi in self.jam_windows)


@dataclass(frozen=True)
class Phase:
    color: str
    duration: float


@dataclass(frozen=True)
class Signal:
    sid: int
    kind: str
    position: float
    phases: tuple[Phase, ...] = ()
    cycle: bool = True
    value: Optional[float] = None  # posted speed for limit signs

    def color_at(self, t: float) -> Optional[str]:
        if self.kind != "light" or not self.phases:
            return None
        total = sum(p.duration for p in self.phases)
        if self.cycle:
            t = t % total
        elif t >= total:
            return self.phases[-1].color
        acc = 0.0
        for phase in self.phases:
            acc += phase.duration
            if t < acc:
                return phase.color
        return self.phases[-1].color


@dataclass(frozen=True)
class Obstacle:
    kind: str
    lane: int
    position: float
    speed: float = 0.0  # km/h, constant
    appears_at: float = 0.0
    disappears_at: Optional[float] = None

    def present_at(self, t: float) -> bool:
        if t < self.appears_at:
            return False
        return self.disappears_at is None or t < self.disappears_at

    def position_at(self, t: float) -> float:
        return self.position + self.speed / 3.6 * max(0.0, t - self.appears_at)


@dataclass(frozen=True)
class WeatherPoint:
    at: float
    raining: Optional[bool] = None
    foggy: Optional[bool] = None
    snowing: Optional[bool] = None
    light_level: Optional[float] = None


@dataclass(frozen=True)
class EgoStart:
    position: float = 0.0
    lane: int = 0
    speed: float = 0.0  # km/h


@dataclass(frozen=True)
class Scenario:
    segments: tuple[Segment, ...]
    destination: float
    signals: tuple[Signal, ...] = ()
    obstacles: tuple[Obstacle, ...] = ()
    weather: tuple[WeatherPoint, ...] = ()
    ego: EgoStart = field(default_factory=EgoStart)
    tick_s: float = TICK_S
    name: str = ""

    @property
    def total_length(self) -> float:
        return sum(seg.length for seg in self.segments)

    def segment_at(self, position: float) -> tuple[Segment, float]:
        """Segment containing `position` and that segment's start offset."""
        start = 0.0
        for seg in self.segments:
            if position < start + seg.length:
                return seg, start
            start += seg.length
        return self.segments[-1], start - self.segments[-1].length

    def next_intersection(self, position: float) -> Optional[tuple[float, Segment]]:
        """Distance to the next intersection entry at or ahead of position."""
        start = 0.0
        for seg in self.segments:
            if seg.kind == "intersection" and start + seg.length > position:
                return max(0.0, start - position), seg
            start += seg.length
        return None

    def weather_at(self, t: float):
        raining = foggy = snowing = False
        light = 1.0
        for point in self.weather:
            if point.at > t:
                break
            if point.raining is not None:
                raining = point.raining
            if point.foggy is not None:
                foggy = point.foggy
            if point.snowing is not None:
                snowing = point.snowing
            if point.light_level is not None:
                light = point.light_level
        return raining, foggy, snowing, light


def _expect(obj: dict, key: str, pointer: str, required: bool = True, default=None):
    if key not in obj:
        if required:
            raise SchemaError(f"{pointer}/{key}", "missing required field")
        return default
    return obj[key]


def _num(value, pointer: str, lo: float = float("-inf"), hi: float = float("inf")) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(pointer, f"expected a number, got {value!r}")
    v = float(value)
    if not (lo <= v <= hi):
        raise SchemaError(pointer, f"{v} outside [{lo}, {hi}]")
    return v


def scenario_from_dict(raw: dict, name: str = "") -> Scenario:
    if not isinstance(raw, dict):
        raise SchemaError("", "scenario document must be a mapping")

    segments: list[Segment] = []
    raw_route = _expect(raw, "route", "")
    if not isinstance(raw_route, list) or not raw_route:
        raise SchemaError("/route", "expected a non-empty list of segments")
    for i, seg in enumerate(raw_route):
        ptr = f"/route/{i}"
        if not isinstance(seg, dict):
            raise SchemaError(ptr, "expected a mapping")
        kind = _expect(seg, "kind", ptr)
        if kind not in SEGMENT_KINDS:
            raise SchemaError(f"{ptr}/kind", f"expected one of {SEGMENT_KINDS}, got {kind!r}")
        jam_windows: list[tuple[float, float]] = []
        for j, window in enumerate(seg.get("jam", []) or []):
            wptr = f"{ptr}/jam/{j}"
            if not isinstance(window, dict):
                raise SchemaError(wptr, "expected {from, until}")
            lo = _num(_expect(window, "from", wptr), f"{wptr}/from", 0)
            hi = _num(_expect(window, "until", wptr), f"{wptr}/until", 0)
            if hi <= lo:
                raise SchemaError(wptr, "'until' must exceed 'from'")
            jam_windows.append((lo, hi))
        fast_lane_min = seg.get("fast_lane_min")
        segments.append(
            Segment(
                kind=kind,
                length=_num(_expect(seg, "length", ptr), f"{ptr}/length", 1),
                lanes=int(_num(seg.get("lanes", 1), f"{ptr}/lanes", 1, 8)),
                speed_limit=_num(seg.get("speed_limit", 60), f"{ptr}/speed_limit", 1),
                jam_windows=tuple(jam_windows),
                fast_lane_min=None
                if fast_lane_min is None
                else _num(fast_lane_min, f"{ptr}/fast_lane_min", 0),
            )
        )
    total = sum(seg.length for seg in segments)

    signals: list[Signal] = []
    for i, sig in enumerate(raw.get("signals", []) or []):
        ptr = f"/signals/{i}"
        if not isinstance(sig, dict):
            raise SchemaError(ptr, "expected a mapping")
        kind = _expect(sig, "kind", ptr)
        if kind not in SIGNAL_KINDS:
            raise SchemaError(f"{ptr}/kind", f"expected one of {SIGNAL_KINDS}, got {kind!r}")
        position = _num(_expect(sig, "position", ptr), f"{ptr}/position", 0)
        if position > total:
            raise SchemaError(f"{ptr}/position", f"{position} beyond route end {total}")
        phases: list[Phase] = []
        for j, phase in enumerate(sig.get("phases", []) or []):
            pptr = f"{ptr}/phases/{j}"
            if not isinstance(phase, dict):
                raise SchemaError(pptr, "expected {color, duration}")
            color = _expect(phase, "color", pptr)
            if color not in LIGHT_COLORS:
                raise SchemaError(f"{pptr}/color", f"expected one of {LIGHT_COLORS}")
            duration = _num(_expect(phase, "duration", pptr), f"{pptr}/duration")
            if duration <= 0:
                raise SchemaError(f"{pptr}/duration", "phase durations must be positive")
            phases.append(Phase(color, duration))
        if kind == "light" and not phases:
            raise SchemaError(f"{ptr}/phases", "a light needs at least one phase")
        value = sig.get("value")
        if kind == "limit" and value is None:
            raise SchemaError(f"{ptr}/value", "a limit sign needs its posted speed")
        signals.append(
            Signal(
                sid=i,
                kind=kind,
                position=position,
                phases=tuple(phases),
                cycle=bool(sig.get("cycle", True)),
                value=None if value is None else _num(value, f"{ptr}/value", 1),
            )
        )

    obstacles: list[Obstacle] = []
    for i, obs in enumerate(raw.get("obstacles", []) or []):
        ptr = f"/obstacles/{i}"
        if not isinstance(obs, dict):
            raise SchemaError(ptr, "expected a mapping")
        kind = _expect(obs, "kind", ptr)
        if kind not in OBSTACLE_KINDS:
            raise SchemaError(f"{ptr}/kind", f"expected one of {OBSTACLE_KINDS}, got {kind!r}")
        position = _num(_expect(obs, "position", ptr), f"{ptr}/position", 0)
        if position > total:
            raise SchemaError(f"{ptr}/position", f"{position} beyond route end {total}")
        disappears = obs.get("disappears_at")
        obstacles.append(
            Obstacle(
                kind=kind,
                lane=int(_num(obs.get("lane", 0), f"{ptr}/lane", 0, 7)),
                position=position,
                speed=_num(obs.get("speed", 0), f"{ptr}/speed", 0),
                appears_at=_num(obs.get("appears_at", 0), f"{ptr}/appears_at", 0),
                disappears_at=None
                if disappears is None
                else _num(disappears, f"{ptr}/disappears_at", 0),
            )
        )

    weather: list[WeatherPoint] = []
    last_at = -1.0
    for i, point in enumerate(raw.get("weather", []) or []):
        ptr = f"/weather/{i}"
        if not isinstance(point, dict):
            raise SchemaError(ptr, "expected a mapping")
        at = _num(_expect(point, "at", ptr), f"{ptr}/at", 0)
        if at < last_at:
            raise SchemaError(f"{ptr}/at", "weather timeline must be sorted")
        last_at = at
        light = point.get("light_level")
        weather.append(
            WeatherPoint(
                at=at,
                raining=point.get("raining"),
                foggy=point.get("foggy"),
                snowing=point.get("snowing"),
                light_level=None if light is None else _num(light, f"{ptr}/light_level", 0, 1),
            )
        )

    raw_ego = raw.get("ego", {}) or {}
    ego = EgoStart(
        position=_num(raw_ego.get("start_position", 0), "/ego/start_position", 0),
        lane=int(_num(raw_ego.get("lane", 0), "/ego/lane", 0, 7)),
        speed=_num(raw_ego.get("start_speed", 0), "/ego/start_speed", 0),
    )
    if ego.lane >= segments[0].lanes:
        raise SchemaError("/ego/lane", f"lane {ego.lane} outside first segment's {segments[0].lanes}")

    destination = _num(_expect(raw, "destination", ""), "/destination", 0)
    if destination > total:
        raise SchemaError("/destination", f"{destination} beyond route end {total}")

    tick_s = _num(raw.get("tick_s", TICK_S), "/tick_s", 0.001, 10)

    return Scenario(
        segments=tuple(segments),
        destination=destination,
        signals=tuple(signals),
        obstacles=tuple(obstacles),
        weather=tuple(weather),
        ego=ego,
        tick_s=tick_s,
        name=name or str(raw.get("name", "")),
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        raw = json.loads(text)
    else:
        raw = yaml.safe_load(text)
    return scenario_from_dict(raw, name=path.stem)
