"""Per-tick abstract state: the scene snapshot and edge-derived events.

The scene stands in for the perception module; events are computed by
comparing consecutive scenes.  ``always`` is a member of every event set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from udrive.params import Value

NIGHT_LIGHT_THRESHOLD = 0.25

LANE_FOLLOW = "lane_follow"
CHANGING_LANE = "changing_lane"
PULLING_OVER = "pulling_over"
STOPPED = "stopped"
PARKED = "parked"
EMERGENCY = "emergency"

SEGMENT_KINDS = ("normal", "motorway", "roundabout", "tunnel", "intersection")


@dataclass(frozen=True)
class Event:
    id: str
    arg: Optional[float] = None

    def __str__(self) -> str:
        if self.arg is None:
            return self.id
        return f"{self.id}({self.arg:g})"


ALWAYS_EVENT = Event("always")

EventSet = frozenset  # of Event


@dataclass(frozen=True)
class WeatherView:
    raining: bool = False
    foggy: bool = False
    snowing: bool = False
    light_level: float = 1.0

    @property
    def any_adverse(self) -> bool:
        return self.raining or self.foggy or self.snowing


@dataclass(frozen=True)
class EgoView:
    position: float  # m along route
    lane: int
    speed: float  # km/h
    accel: float  # m/s^2
    maneuver: str = LANE_FOLLOW


@dataclass(frozen=True)
class SegmentView:
    kind: str
    speed_limit: float  # km/h
    lanes: int
    jam: bool = False
    fast_lane_min: Optional[float] = None


@dataclass(frozen=True)
class ObstacleView:
    kind: str  # static | vehicle | pedestrian
    distance: float  # m longitudinal, signed (ahead positive)
    lane: int
    speed: float = 0.0  # km/h


@dataclass(frozen=True)
class SignalView:
    sid: int
    kind: str  # red_light | green_light | yellow_light | stop_sign | limit
    distance: float  # m to stop line, signed
    value: Optional[float] = None  # limit signs carry the posted speed


@dataclass(frozen=True)
class IntersectionView:
    """Approach info for the next intersection ahead (within detection)."""

    distance: float  # m to the entry line
    length: float
    jam: bool
    signalized: bool


@dataclass(frozen=True)
class Scene:
    time: float
    weather: WeatherView
    ego: EgoView
    segment: SegmentView
    obstacles: tuple[ObstacleView, ...] = ()
    signals: tuple[SignalView, ...] = ()
    next_intersection: Optional[IntersectionView] = None


@dataclass(frozen=True)
class PlannerView:
    target_speed: float  # km/h
    commanded_accel: float  # m/s^2
    lane_command: str  # keep | begin_change_left | begin_change_right | continue_change
    stop_point: Optional[float] = None
    light_state: str = "off"
    horn: bool = False


@dataclass(frozen=True)
class TraceStep:
    tick: int
    scene: Scene
    events: frozenset
    params: dict[str, Value]
    active_rules: tuple[str, ...]
    planner: PlannerView
    rejected_rules: tuple[str, ...] = ()
    notes: tuple[str, ...] = field(default=(), compare=False)


_WEATHER_FLAGS = (
    ("raining", "rain_started", "rain_stopped"),
    ("foggy", "fog_started", "fog_stopped"),
    ("snowing", "snow_started", "snow_stopped"),
)

_OBSTACLE_EVENTS = {
    "static": ("static_obstacle_detected", None),
    "vehicle": ("vehicle_detected", "vehicle_no_longer_detected"),
    "pedestrian": ("pedestrian_detected", "pedestrian_no_longer_detected"),
}

_SIGNAL_DETECTED = {
    "red_light": "red_light_detected",
    "green_light": "green_light_detected",
    "yellow_light": "yellow_light_detected",
    "stop_sign": "stop_sign_detected",
    "limit": "limit_detected",
}

_SEGMENT_ENTER = {
    "motorway": "entering_motorway",
    "roundabout": "entering_roundabout",
    "tunnel": "entering_tunnel",
    "intersection": "entering_intersection",
}

_SEGMENT_EXIT = {
    "motorway": "exiting_motorway",
    "tunnel": "exiting_tunnel",
    "intersection": "exiting_intersection",
}


def _detected_obstacle_kinds(scene: Scene, detection_range: float) -> set[str]:
    return {
        o.kind
        for o in scene.obstacles
        if abs(o.distance) <= detection_range
    }


def _visible_signals(scene: Scene, detection_range: float) -> dict[int, SignalView]:
    return {
        s.sid: s
        for s in scene.signals
        if 0.0 <= s.distance <= detection_range
    }


def derive_events(
    prev: Optional[Scene], cur: Scene, detection_range: float
) -> frozenset:
    """Edge-detect events between consecutive scenes.

    With prev absent (journey start) every currently-true detection fires.
    """
    events: set[Event] = {ALWAYS_EVENT}

    for flag, started, stopped in _WEATHER_FLAGS:
        now = getattr(cur.weather, flag)
        before = getattr(prev.weather, flag) if prev is not None else False
        if now and not before:
            events.add(Event(started))
        elif before and not now:
            events.add(Event(stopped))

    cur_kinds = _detected_obstacle_kinds(cur, detection_range)
    prev_kinds = _detected_obstacle_kinds(prev, detection_range) if prev is not None else set()
    for kind, (detected, gone) in _OBSTACLE_EVENTS.items():
        if kind in cur_kinds and kind not in prev_kinds:
            events.add(Event(detected))
        elif gone is not None and kind in prev_kinds and kind not in cur_kinds:
            events.add(Event(gone))

    cur_sigs = _visible_signals(cur, detection_range)
    prev_sigs = _visible_signals(prev, detection_range) if prev is not None else {}
    for sid, sig in cur_sigs.items():
        before = prev_sigs.get(sid)
        if before is None or before.kind != sig.kind:
            name = _SIGNAL_DETECTED[sig.kind]
            events.add(Event(name, sig.value if sig.kind == "limit" else None))
    if any(sid not in cur_sigs for sid in prev_sigs):
        events.add(Event("signal_no_longer_detected"))

    prev_kind = prev.segment.kind if prev is not None else None
    if cur.segment.kind != prev_kind:
        if prev_kind in _SEGMENT_EXIT:
            events.add(Event(_SEGMENT_EXIT[prev_kind]))
        if cur.segment.kind in _SEGMENT_ENTER:
            events.add(Event(_SEGMENT_ENTER[cur.segment.kind]))

    prev_man = prev.ego.maneuver if prev is not None else None
    if cur.ego.maneuver != prev_man:
        if cur.ego.maneuver == CHANGING_LANE:
            events.add(Event("change_lane_started"))
        elif prev_man == CHANGING_LANE:
            events.add(Event("change_lane_finished"))
        if cur.ego.maneuver == EMERGENCY:
            events.add(Event("emergency_stop"))

    return frozenset(events)


def matches(trigger_id: str, trigger_arg: Optional[float], events: frozenset) -> bool:
    for event in events:
        if event.id != trigger_id:
            continue
        if trigger_arg is None or event.arg == trigger_arg:
            return True
    return False


def eval_condition(cond, negated: bool, scene: Scene) -> bool:
    """Evaluate one condition against the scene; negation applied last."""
    result = _eval(cond.id, cond.args, scene)
    return (not result) if negated else result


def _nearest_ahead(scene: Scene, kinds: Optional[set[str]] = None) -> Optional[SignalView]:
    best: Optional[SignalView] = None
    for sig in scene.signals:
        if sig.distance < 0:
            continue
        if kinds is not None and sig.kind not in kinds:
            continue
        if best is None or sig.distance < best.distance:
            best = sig
    return best


def _eval(cid: str, args: tuple, scene: Scene) -> bool:
    if cid == "is_raining":
        return scene.weather.raining
    if cid == "is_foggy":
        return scene.weather.foggy
    if cid == "is_snowing":
        return scene.weather.snowing
    if cid == "is_night":
        return scene.weather.light_level < NIGHT_LIGHT_THRESHOLD
    if cid == "find_obstacle":
        return bool(scene.obstacles)
    if cid == "obstacle_distance_leq":
        bound = float(args[0].value)
        return any(0.0 <= o.distance <= bound for o in scene.obstacles)
    if cid == "find_signal":
        return _nearest_ahead(scene) is not None
    if cid == "speed_limit_geq":
        sig = _nearest_ahead(scene, {"limit"})
        return sig is not None and sig.value is not None and sig.value >= float(args[0].value)
    if cid == "is_traffic_light":
        sig = _nearest_ahead(scene, {"red_light", "green_light", "yellow_light"})
        return sig is not None and sig.kind == f"{args[0].value}_light"
    if cid == "is_motorway":
        return scene.segment.kind == "motorway"
    if cid == "is_roundabout":
        return scene.segment.kind == "roundabout"
    if cid == "is_jam":
        return scene.segment.jam
    if cid == "is_tunnel":
        return scene.segment.kind == "tunnel"
    if cid == "is_intersection":
        return scene.segment.kind == "intersection"
    raise ValueError(f"unknown condition {cid!r}")
