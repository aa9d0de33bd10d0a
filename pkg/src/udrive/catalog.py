"""Registry of every event, condition, action, and planner parameter.

Actions resolve to planner-parameter bindings, manoeuvre commands, or meta
commands via ``action_binding``.  Baseline parameter defaults ship as a
machine-readable ``defaults.toml`` validated on load.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Union

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib  # type: ignore[no-redef]

from udrive.ast import ActionCall, BOOL, ENUM, NUMBER, STRING
from udrive.params import ParameterStore, Value

# categories
WEATHER = "weather"
OBSTACLE = "obstacle"
SIGNAL = "signal"
ROAD = "road"
ALWAYS = "always"

SPEED = "speed"
DISTANCE = "distance"
MANOEUVRE = "manoeuvre"
OTHER = "other"

LIGHT_NAMES = ("high_beam", "low_beam", "fog_light", "warning_flash")
SIDES = ("left", "right")
LANE_POSITIONS = ("left", "right", "middle")
LIGHT_COLORS = ("red", "green", "yellow")


class CatalogError(Exception):
    pass


class UnknownAction(CatalogError):
    pass


class DomainViolation(CatalogError):
    pass


@dataclass(frozen=True)
class ArgSpec:
    name: str
    kind: str  # number | bool | enum | string
    lo: float = float("-inf")
    hi: float = float("inf")
    choices: tuple[str, ...] = ()


@dataclass(frozen=True)
class EventSpec:
    id: str
    category: str
    arity: int = 0


@dataclass(frozen=True)
class ConditionSpec:
    id: str
    category: str
    params: tuple[ArgSpec, ...] = ()


@dataclass(frozen=True)
class ActionSpec:
    id: str
    category: str
    tags: frozenset[str] = frozenset()
    params: tuple[ArgSpec, ...] = ()
    min_args: int = -1  # -1 means all params required
    kind: str = "binding"  # binding | manoeuvre | meta
    param_keys: tuple[str, ...] = ()
    optional_left: bool = False  # optional params sit at the left (increase_to)

    def required_args(self) -> int:
        return len(self.params) if self.min_args < 0 else self.min_args


# manoeuvre commands handed to the simulator


@dataclass(frozen=True)
class ChangeLane:
    side: str
    count: int = 1


@dataclass(frozen=True)
class LaneFollow:
    pass


@dataclass(frozen=True)
class Stop:
    pass


@dataclass(frozen=True)
class EmergencyStop:
    pass


@dataclass(frozen=True)
class PullOver:
    pass


@dataclass(frozen=True)
class EmergencyPullOver:
    pass


@dataclass(frozen=True)
class Launch:
    pass


@dataclass(frozen=True)
class Park:
    space_position: float


@dataclass(frozen=True)
class Replan:
    pass


@dataclass(frozen=True)
class SpeedRamp:
    """Transient accelerate/decelerate-to command; not a parameter binding."""

    target_kmh: float
    accel: Optional[float]  # m/s^2, None = use the maximum allowed
    direction: int  # +1 increase, -1 decrease


@dataclass(frozen=True)
class ClearSpeedRamp:
    pass


@dataclass(frozen=True)
class ClearManoeuvres:
    pass


ManoeuvreCommand = Union[
    ChangeLane,
    LaneFollow,
    Stop,
    EmergencyStop,
    PullOver,
    EmergencyPullOver,
    Launch,
    Park,
    Replan,
    SpeedRamp,
    ClearSpeedRamp,
    ClearManoeuvres,
]


@dataclass(frozen=True)
class MetaCommand:
    kind: str  # revise_rule | clear_rule
    args: tuple


def _num(name: str, lo: float = float("-inf"), hi: float = float("inf")) -> ArgSpec:
    return ArgSpec(name, NUMBER, lo, hi)


def _bool(name: str) -> ArgSpec:
    return ArgSpec(name, BOOL)


def _enum(name: str, choices: tuple[str, ...]) -> ArgSpec:
    return ArgSpec(name, ENUM, choices=choices)


_EVENT_LIST = [
    # weather
    ("rain_started", WEATHER), ("rain_stopped", WEATHER),
    ("fog_started", WEATHER), ("fog_stopped", WEATHER),
    ("snow_started", WEATHER), ("snow_stopped", WEATHER),
    # obstacle
    ("static_obstacle_detected", OBSTACLE),
    ("pedestrian_detected", OBSTACLE), ("pedestrian_no_longer_detected", OBSTACLE),
    ("vehicle_detected", OBSTACLE), ("vehicle_no_longer_detected", OBSTACLE),
    # signal
    ("red_light_detected", SIGNAL), ("green_light_detected", SIGNAL),
    ("yellow_light_detected", SIGNAL), ("stop_sign_detected", SIGNAL),
    ("signal_no_longer_detected", SIGNAL),
    # road
    ("change_lane_started", ROAD), ("change_lane_finished", ROAD),
    ("entering_motorway", ROAD), ("exiting_motorway", ROAD),
    ("entering_roundabout", ROAD),
    ("entering_tunnel", ROAD), ("exiting_tunnel", ROAD),
    ("entering_intersection", ROAD), ("exiting_intersection", ROAD),
    ("emergency_stop", ROAD), ("destination_reached", ROAD),
    ("always", ALWAYS),
]

EVENTS: dict[str, EventSpec] = {name: EventSpec(name, cat) for name, cat in _EVENT_LIST}
EVENTS["limit_detected"] = EventSpec("limit_detected", SIGNAL, arity=1)


CONDITIONS: dict[str, ConditionSpec] = {
    spec.id: spec
    for spec in [
        ConditionSpec("is_raining", WEATHER),
        ConditionSpec("is_foggy", WEATHER),
        ConditionSpec("is_snowing", WEATHER),
        ConditionSpec("is_night", WEATHER),
        ConditionSpec("find_obstacle", OBSTACLE),
        ConditionSpec("obstacle_distance_leq", OBSTACLE, (_num("distance", 0),)),
        ConditionSpec("find_signal", SIGNAL),
        ConditionSpec("speed_limit_geq", SIGNAL, (_num("limit", 0),)),
        ConditionSpec("is_traffic_light", SIGNAL, (_enum("colour", LIGHT_COLORS),)),
        ConditionSpec("is_motorway", ROAD),
        ConditionSpec("is_roundabout", ROAD),
        ConditionSpec("is_jam", ROAD),
        ConditionSpec("is_tunnel", ROAD),
        ConditionSpec("is_intersection", ROAD),
    ]
}


def _a(
    aid: str,
    category: str,
    tags: str = "",
    params: tuple[ArgSpec, ...] = (),
    min_args: int = -1,
    kind: str = "binding",
    keys: tuple[str, ...] = (),
    optional_left: bool = False,
) -> ActionSpec:
    return ActionSpec(
        aid,
        category,
        frozenset(tags.split()) if tags else frozenset(),
        params,
        min_args,
        kind,
        keys,
        optional_left,
    )


_SPEED_MAX = 400.0
_DIST_MAX = 10_000.0

ACTIONS: dict[str, ActionSpec] = {
    spec.id: spec
    for spec in [
        # speed actions
        _a("keep_speed", SPEED, params=(_num("speed", 0, _SPEED_MAX),), min_args=0,
           keys=("speed.cruise", "speed.max", "speed.min")),
        _a("max_speed", SPEED, params=(_num("speed", 0, _SPEED_MAX),), keys=("speed.max",)),
        _a("min_speed", SPEED, params=(_num("speed", 0, _SPEED_MAX),), keys=("speed.min",)),
        _a("increase_max_speed", SPEED, params=(_num("delta", 0, _SPEED_MAX),), keys=("speed.max",)),
        _a("decrease_max_speed", SPEED, params=(_num("delta", 0, _SPEED_MAX),), keys=("speed.max",)),
        _a("increase_min_speed", SPEED, params=(_num("delta", 0, _SPEED_MAX),), keys=("speed.min",)),
        _a("decrease_min_speed", SPEED, params=(_num("delta", 0, _SPEED_MAX),), keys=("speed.min",)),
        _a("increase_to", SPEED, params=(_num("accel", 0, 10), _num("speed", 0, _SPEED_MAX)),
           min_args=1, kind="manoeuvre", optional_left=True),
        _a("decrease_to", SPEED, params=(_num("decel", 0, 10), _num("speed", 0, _SPEED_MAX)),
           min_args=1, kind="manoeuvre", optional_left=True),
        _a("cancel_speed_control", SPEED, kind="manoeuvre"),
        _a("max_plan_speed", SPEED, "P", (_num("speed", 0, _SPEED_MAX),), keys=("speed.max_plan",)),
        _a("cruise_speed", SPEED, "P", (_num("speed", 0, _SPEED_MAX),), keys=("speed.cruise",)),
        _a("near_stop_speed", SPEED, "P", (_num("speed", 0, 30),), keys=("speed.near_stop",)),
        _a("expect_speed", SPEED, "S R", (_num("speed", 0, _SPEED_MAX),), keys=("speed.expect",)),
        _a("decrease_ratio", SPEED, "O W", (_num("ratio", 0, 1),), keys=("speed.decrease_ratio",)),
        _a("dec_long_acc_ratio", SPEED, "W", (_num("ratio", 0, 1),),
           keys=("speed.dec_long_acc_ratio",)),
        _a("dec_lat_acc_ratio", SPEED, "W", (_num("ratio", 0, 1),),
           keys=("speed.dec_lat_acc_ratio",)),
        _a("speed_range", SPEED, "C", (_num("low", 0, _SPEED_MAX), _num("high", 0, _SPEED_MAX)),
           keys=("check.speed_range",)),
        _a("long_acc_range", SPEED, "C", (_num("low", -10, 10), _num("high", -10, 10)),
           keys=("check.long_acc_range",)),
        _a("lat_acc_range", SPEED, "C", (_num("low", -10, 10), _num("high", -10, 10)),
           keys=("check.lat_acc_range",)),
        # distance actions
        _a("long_buffer_dist", DISTANCE, "O", (_num("dist", 0, _DIST_MAX),),
           keys=("dist.long_buffer",)),
        _a("lat_buffer_dist", DISTANCE, "O", (_num("dist", 0, _DIST_MAX),),
           keys=("dist.lat_buffer",)),
        _a("follow_dist", DISTANCE, "O", (_num("dist", 0, _DIST_MAX),), keys=("dist.follow",)),
        _a("yield_dist", DISTANCE, "O", (_num("dist", 0, _DIST_MAX),), keys=("dist.yield",)),
        _a("stop_dist", DISTANCE, "O S R", (_num("dist", 0, _DIST_MAX),), keys=("dist.stop",)),
        _a("prep_dist", DISTANCE, "S R", (_num("dist", 0, _DIST_MAX),), keys=("dist.prep",)),
        _a("check_dist", DISTANCE, "S R", (_num("dist", 1, _DIST_MAX),), keys=("dist.check",)),
        _a("expansion_factor", DISTANCE, "W", (_num("factor", 0.1, 10),),
           keys=("dist.expansion_factor",)),
        # manoeuvre actions
        _a("re_planning", MANOEUVRE, kind="manoeuvre"),
        _a("lane_follow", MANOEUVRE, kind="manoeuvre"),
        _a("change_lane", MANOEUVRE, params=(_enum("side", SIDES), _num("count", 1, 8)),
           min_args=1, kind="manoeuvre"),
        _a("park", MANOEUVRE, params=(_num("space_position", 0, _DIST_MAX),), kind="manoeuvre"),
        _a("pull_over", MANOEUVRE, kind="manoeuvre"),
        _a("emergency_pull_over", MANOEUVRE, kind="manoeuvre"),
        _a("stop", MANOEUVRE, kind="manoeuvre"),
        _a("emergency_stop", MANOEUVRE, kind="manoeuvre"),
        _a("launch", MANOEUVRE, kind="manoeuvre"),
        _a("cancel_manoeuvre_control", MANOEUVRE, kind="manoeuvre"),
        # other actions
        _a("revise_rule", OTHER, params=(
            ArgSpec("rule", STRING), _enum("action", ()), _num("value")), kind="meta"),
        _a("clear_rule", OTHER, params=(ArgSpec("rule", STRING),), kind="meta"),
        _a("hock_horn", OTHER, keys=("device.horn",)),
        _a("set_light", OTHER, params=(_enum("light", LIGHT_NAMES),), keys=("device.light_state",)),
        _a("off_light", OTHER, params=(_enum("light", LIGHT_NAMES),), keys=("device.light_state",)),
        _a("drive_side", OTHER, "P", (_enum("side", LANE_POSITIONS),), keys=("pref.drive_side",)),
        _a("pri_lane_change", OTHER, "P", (_bool("enable"),), keys=("pref.pri_lane_change",)),
        _a("borrow_adj_lane", OTHER, "P", (_bool("enable"),), keys=("pref.borrow_adj_lane",)),
        _a("obstacle_dec", OTHER, "O", (_bool("enable"),), keys=("pref.obstacle_dec",)),
        _a("comply_signs", OTHER, "S", (_bool("enable"),), keys=("pref.comply_signs",)),
        _a("r_turn_red", OTHER, "S", (_bool("enable"),), keys=("pref.r_turn_red",)),
        _a("time_interval", OTHER, "R", (_num("seconds", 0, 3600),), keys=("pref.time_interval",)),
        _a("dest_pullover", OTHER, "R", (_bool("enable"),), keys=("pref.dest_pullover",)),
        _a("stop_no_sig", OTHER, "R", (_bool("enable"),), keys=("pref.stop_no_sig",)),
        _a("max_hd", OTHER, "R", (_num("deviation", 0, 180),), keys=("pref.max_hd",)),
        _a("max_sp", OTHER, "R", (_num("percentage", 0, 100),), keys=("pref.max_sp",)),
        _a("check_env", OTHER, "S R", (_bool("enable"),), keys=("pref.check_env",)),
        _a("check_speed", OTHER, "S R", (_bool("enable"),), keys=("pref.check_speed",)),
        _a("wait_time", OTHER, "S R", (_num("seconds", 0, 3600),), keys=("pref.wait_time",)),
        _a("crawl", OTHER, "S R", (_bool("enable"),), keys=("pref.crawl",)),
        _a("crawl_time", OTHER, "S R", (_num("seconds", 0, 3600),), keys=("pref.crawl_time",)),
        _a("check_traj", OTHER, "C", (_bool("enable"),), keys=("pref.check_traj",)),
    ]
}


@dataclass(frozen=True)
class ParamDomain:
    kind: str  # number | bool | enum | range
    lo: float = float("-inf")
    hi: float = float("inf")
    choices: tuple[str, ...] = ()


PARAM_DOMAINS: dict[str, ParamDomain] = {
    "speed.cruise": ParamDomain(NUMBER, 0, _SPEED_MAX),
    "speed.max": ParamDomain(NUMBER, 0, _SPEED_MAX),
    "speed.min": ParamDomain(NUMBER, 0, _SPEED_MAX),
    "speed.max_plan": ParamDomain(NUMBER, 0, _SPEED_MAX),
    "speed.near_stop": ParamDomain(NUMBER, 0, 30),
    "speed.expect": ParamDomain(NUMBER, 0, _SPEED_MAX),
    "speed.decrease_ratio": ParamDomain(NUMBER, 0, 1),
    "speed.dec_long_acc_ratio": ParamDomain(NUMBER, 0, 1),
    "speed.dec_lat_acc_ratio": ParamDomain(NUMBER, 0, 1),
    "check.speed_range": ParamDomain("range", 0, _SPEED_MAX),
    "check.long_acc_range": ParamDomain("range", -10, 10),
    "check.lat_acc_range": ParamDomain("range", -10, 10),
    "dist.long_buffer": ParamDomain(NUMBER, 0, _DIST_MAX),
    "dist.lat_buffer": ParamDomain(NUMBER, 0, _DIST_MAX),
    "dist.follow": ParamDomain(NUMBER, 0, _DIST_MAX),
    "dist.yield": ParamDomain(NUMBER, 0, _DIST_MAX),
    "dist.stop": ParamDomain(NUMBER, 0, _DIST_MAX),
    "dist.prep": ParamDomain(NUMBER, 0, _DIST_MAX),
    "dist.check": ParamDomain(NUMBER, 1, _DIST_MAX),
    "dist.expansion_factor": ParamDomain(NUMBER, 0.1, 10),
    "pref.drive_side": ParamDomain(ENUM, choices=LANE_POSITIONS),
    "pref.pri_lane_change": ParamDomain(BOOL),
    "pref.borrow_adj_lane": ParamDomain(BOOL),
    "pref.obstacle_dec": ParamDomain(BOOL),
    "pref.comply_signs": ParamDomain(BOOL),
    "pref.r_turn_red": ParamDomain(BOOL),
    "pref.time_interval": ParamDomain(NUMBER, 0, 3600),
    "pref.dest_pullover": ParamDomain(BOOL),
    "pref.stop_no_sig": ParamDomain(BOOL),
    "pref.max_hd": ParamDomain(NUMBER, 0, 180),
    "pref.max_sp": ParamDomain(NUMBER, 0, 100),
    "pref.check_env": ParamDomain(BOOL),
    "pref.check_speed": ParamDomain(BOOL),
    "pref.wait_time": ParamDomain(NUMBER, 0, 3600),
    "pref.crawl": ParamDomain(BOOL),
    "pref.crawl_time": ParamDomain(NUMBER, 0, 3600),
    "pref.check_traj": ParamDomain(BOOL),
    "device.light_state": ParamDomain(ENUM, choices=("off",) + LIGHT_NAMES),
    "device.horn": ParamDomain(BOOL),
}


@dataclass(frozen=True)
class Catalog:
    """Immutable registries; shareable across any number of callers."""

    events: dict[str, EventSpec] = field(default_factory=lambda: dict(EVENTS))
    conditions: dict[str, ConditionSpec] = field(default_factory=lambda: dict(CONDITIONS))
    actions: dict[str, ActionSpec] = field(default_factory=lambda: dict(ACTIONS))
    param_domains: dict[str, ParamDomain] = field(default_factory=lambda: dict(PARAM_DOMAINS))

    def lookup_action(self, action_id: str) -> ActionSpec:
        spec = self.actions.get(action_id)
        if spec is None:
            raise UnknownAction(f"unknown action {action_id!r}")
        return spec


_DEFAULT_CATALOG = Catalog()


def default_catalog() -> Catalog:
    return _DEFAULT_CATALOG


def lookup_action(action_id: str, cat: Catalog | None = None) -> ActionSpec:
    return (cat or _DEFAULT_CATALOG).lookup_action(action_id)


def _arg(call: ActionCall, index: int) -> object:
    return call.args[index].value


def _num_arg(call: ActionCall, index: int) -> float:
    value = _arg(call, index)
    if not isinstance(value, float):
        raise DomainViolation(f"{call.id}: argument {index + 1} must be a number")
    return value


def _check_range_pair(call: ActionCall) -> tuple[float, float]:
    lo, hi = _num_arg(call, 0), _num_arg(call, 1)
    if lo > hi:
        raise DomainViolation(f"{call.id}: range low {lo} exceeds high {hi}")
    return lo, hi


def check_args(call: ActionCall, spec: ActionSpec) -> None:
    """Arity and argument-domain check; raises DomainViolation."""
    required = spec.required_args()
    if not (required <= len(call.args) <= len(spec.params)):
        raise DomainViolation(
            f"{call.id}: expected {required}..{len(spec.params)} arguments, got {len(call.args)}"
        )
    # increase_to(n) omits its leading accel; change_lane(e) omits its trailing count
    offset = len(spec.params) - len(call.args) if spec.optional_left else 0
    for i, lit in enumerate(call.args):
        arg_spec = spec.params[i + offset]
        if arg_spec.kind == NUMBER:
            if lit.kind != NUMBER:
                raise DomainViolation(f"{call.id}: {arg_spec.name} must be a number")
            v = float(lit.value)
            if not (arg_spec.lo <= v <= arg_spec.hi) or v != v:
                raise DomainViolation(
                    f"{call.id}: {arg_spec.name}={v} outside [{arg_spec.lo}, {arg_spec.hi}]"
                )
        elif arg_spec.kind == BOOL:
            if lit.kind != BOOL:
                raise DomainViolation(f"{call.id}: {arg_spec.name} must be true or false")
        elif arg_spec.kind == ENUM:
            if lit.kind != ENUM or (arg_spec.choices and lit.value not in arg_spec.choices):
                raise DomainViolation(
                    f"{call.id}: {arg_spec.name} must be one of {', '.join(arg_spec.choices)}"
                )
        elif arg_spec.kind == STRING:
            if lit.kind != STRING:
                raise DomainViolation(f"{call.id}: {arg_spec.name} must be a string")


BindingResult = Union[list, ManoeuvreCommand, MetaCommand]


def action_binding(
    call: ActionCall,
    current: ParameterStore,
    ego_speed_kmh: Optional[float] = None,
    cat: Catalog | None = None,
) -> BindingResult:
    """Resolve an action call against the visible parameter state.

    Relative speed actions freeze an absolute value against ``current``;
    manoeuvre actions return a command for the simulator; revise_rule and
    clear_rule return meta commands.
    """
    catalog = cat or _DEFAULT_CATALOG
    spec = catalog.lookup_action(call.id)
    check_args(call, spec)

    aid = call.id
    if spec.kind == "meta":
        return MetaCommand(aid, tuple(lit.value for lit in call.args))
    if spec.kind == "manoeuvre":
        return _manoeuvre_command(call)

    if aid == "keep_speed":
        if call.args:
            pinned = _num_arg(call, 0)
        elif ego_speed_kmh is not None:
            pinned = float(ego_speed_kmh)
        else:
            raise DomainViolation("keep_speed with no argument needs the current speed")
        return [("speed.cruise", pinned), ("speed.max", pinned), ("speed.min", pinned)]
    if aid == "increase_max_speed":
        return [("speed.max", float(current.effective("speed.max")) + _num_arg(call, 0))]
    if aid == "decrease_max_speed":
        return [("speed.max", max(0.0, float(current.effective("speed.max")) - _num_arg(call, 0)))]
    if aid == "increase_min_speed":
        return [("speed.min", float(current.effective("speed.min")) + _num_arg(call, 0))]
    if aid == "decrease_min_speed":
        return [("speed.min", max(0.0, float(current.effective("speed.min")) - _num_arg(call, 0)))]
    if aid in ("speed_range", "long_acc_range", "lat_acc_range"):
        return [(spec.param_keys[0], _check_range_pair(call))]
    if aid == "hock_horn":
        return [("device.horn", True)]
    if aid == "set_light":
        return [("device.light_state", str(_arg(call, 0)))]
    if aid == "off_light":
        return [("device.light_state", "off")]

    # plain one-key assignments
    key = spec.param_keys[0]
    value: Value = call.args[0].value if call.args else True
    return [(key, value)]


def _manoeuvre_command(call: ActionCall) -> ManoeuvreCommand:
    aid = call.id
    if aid == "change_lane":
        side = str(_arg(call, 0))
        count = int(_num_arg(call, 1)) if len(call.args) > 1 else 1
        return ChangeLane(side, count)
    if aid == "lane_follow":
        return LaneFollow()
    if aid == "stop":
        return Stop()
    if aid == "emergency_stop":
        return EmergencyStop()
    if aid == "pull_over":
        return PullOver()
    if aid == "emergency_pull_over":
        return EmergencyPullOver()
    if aid == "launch":
        return Launch()
    if aid == "park":
        return Park(_num_arg(call, 0))
    if aid == "re_planning":
        return Replan()
    if aid in ("increase_to", "decrease_to"):
        direction = 1 if aid == "increase_to" else -1
        if len(call.args) == 2:
            return SpeedRamp(_num_arg(call, 1), _num_arg(call, 0), direction)
        return SpeedRamp(_num_arg(call, 0), None, direction)
    if aid == "cancel_speed_control":
        return ClearSpeedRamp()
    if aid == "cancel_manoeuvre_control":
        return ClearManoeuvres()
    raise UnknownAction(f"no manoeuvre mapping for {aid!r}")


def _validate_param_value(key: str, value: object, domain: ParamDomain) -> Value:
    if domain.kind == NUMBER:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise CatalogError(f"{key}: expected a number, got {value!r}")
        v = float(value)
        if not (domain.lo <= v <= domain.hi):
            raise CatalogError(f"{key}: {v} outside [{domain.lo}, {domain.hi}]")
        return v
    if domain.kind == BOOL:
        if not isinstance(value, bool):
            raise CatalogError(f"{key}: expected true/false, got {value!r}")
        return value
    if domain.kind == ENUM:
        if not isinstance(value, str) or value not in domain.choices:
            raise CatalogError(f"{key}: expected one of {domain.choices}, got {value!r}")
        return value
    if domain.kind == "range":
        if (
            not isinstance(value, (list, tuple))
            or len(value) != 2
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
        ):
            raise CatalogError(f"{key}: expected a [low, high] pair, got {value!r}")
        lo, hi = float(value[0]), float(value[1])
        if lo > hi or not (domain.lo <= lo and hi <= domain.hi):
            raise CatalogError(f"{key}: bad range [{lo}, {hi}]")
        return (lo, hi)
    raise CatalogError(f"{key}: unknown domain kind {domain.kind}")


def load_defaults(path: Optional[str] = None) -> dict[str, Value]:
    """Read baseline parameter defaults; schema errors are fatal."""
    if path is None:
        path = os.environ.get("UDRIVE_DEFAULTS")
    if path is None:
        data = resources.files("udrive").joinpath("data/defaults.toml").read_bytes()
        raw = tomllib.loads(data.decode("utf-8"))
        source = "<packaged defaults>"
    else:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        source = path

    flat: dict[str, object] = {}
    for section, entries in raw.items():
        if not isinstance(entries, dict):
            raise CatalogError(f"{source}: top-level entry {section!r} must be a table")
        for name, value in entries.items():
            flat[f"{section}.{name}"] = value

    unknown = sorted(set(flat) - set(PARAM_DOMAINS))
    if unknown:
        raise CatalogError(f"{source}: unknown parameter keys: {', '.join(unknown)}")
    missing = sorted(set(PARAM_DOMAINS) - set(flat))
    if missing:
        raise CatalogError(f"{source}: missing parameter keys: {', '.join(missing)}")

    return {key: _validate_param_value(key, flat[key], PARAM_DOMAINS[key]) for key in PARAM_DOMAINS}


def baseline_parameters(path: Optional[str] = None) -> ParameterStore:
    """Fully populated baseline parameter store; every key present."""
    return ParameterStore(load_defaults(path))
