"""Parameterized longitudinal + lane planner.

Behavior is entirely a function of the parameter store and the queued
manoeuvres.  Approaches to stop points follow the constant-deceleration law
a = -v^2/(2d), re-evaluated each cycle, with a near-stop crawl floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from udrive.catalog import (
    ChangeLane,
    ClearManoeuvres,
    ClearSpeedRamp,
    EmergencyPullOver,
    EmergencyStop,
    Launch,
    LaneFollow,
    ManoeuvreCommand,
    Park,
    PullOver,
    Replan,
    SpeedRamp,
    Stop,
)
from udrive.params import Value
from udrive.scene import PlannerView, Scene

PHYS_ACC_MIN = -6.0  # m/s^2, built-in physical braking limit
PHYS_ACC_MAX = 3.0
COMFORT_DECEL = 2.0  # m/s^2, shapes the braking approach curve
STOP_SPEED_MS = 0.15  # below this the vehicle counts as stopped
LANE_CHANGE_DURATION = 1.0  # s

# sticky-stop deceleration rates by cause
_STOP_RATES = {
    "stop_cmd": 2.5,
    "pull_over": 2.0,
    "emergency_pull_over": 4.0,
    "emergency": 6.0,
}

KEEP = "keep"
CONTINUE_CHANGE = "continue_change"


@dataclass
class ManoeuvreState:
    """Sim-side manoeuvre bookkeeping fed by the engine's command queue."""

    pending_changes: list[str] = field(default_factory=list)
    change_side: Optional[str] = None
    change_progress: float = 0.0
    last_change_end: float = -math.inf
    lane_follow_pin: bool = False
    speed_ramp: Optional[SpeedRamp] = None
    sticky_stop: Optional[str] = None  # stop_cmd | pull_over | emergency_pull_over | emergency
    park_position: Optional[float] = None
    replanning_until: float = -math.inf
    satisfied_stops: set = field(default_factory=set)
    wait_release: dict = field(default_factory=dict)  # stop id -> release time

    def enqueue(self, command: ManoeuvreCommand, now: float) -> None:
        if isinstance(command, ChangeLane):
            self.pending_changes.extend([command.side] * command.count)
        elif isinstance(command, LaneFollow):
            self.lane_follow_pin = True
        elif isinstance(command, Stop):
            self.sticky_stop = "stop_cmd"
        elif isinstance(command, EmergencyStop):
            self.sticky_stop = "emergency"
        elif isinstance(command, PullOver):
            self.sticky_stop = "pull_over"
        elif isinstance(command, EmergencyPullOver):
            self.sticky_stop = "emergency_pull_over"
        elif isinstance(command, Launch):
            self.sticky_stop = None
            self.park_position = None
        elif isinstance(command, Park):
            self.park_position = command.space_position
        elif isinstance(command, Replan):
            self.replanning_until = now + 1.0
        elif isinstance(command, SpeedRamp):
            self.speed_ramp = command
        elif isinstance(command, ClearSpeedRamp):
            self.speed_ramp = None
        elif isinstance(command, ClearManoeuvres):
            self.pending_changes.clear()
            self.lane_follow_pin = False
            self.change_side = None
            self.change_progress = 0.0


@dataclass(frozen=True)
class PlanDecision:
    view: PlannerView
    stop_reason: Optional[str] = None  # why a stop point / hold exists
    holding: bool = False  # vehicle should stay at rest this tick


def _clamp(x: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, x))


def plan_step(
    scene: Scene,
    params: dict[str, Value],
    man: ManoeuvreState,
    dt: float,
    destination: Optional[float] = None,
) -> PlanDecision:
    """One planning cycle.  Total: never raises on any scene."""
    v_kmh = scene.ego.speed
    v = v_kmh / 3.6
    pos = scene.ego.position
    now = scene.time

    ef = float(params["dist.expansion_factor"])
    adverse = scene.weather.any_adverse
    check_traj = bool(params["pref.check_traj"])

    if check_traj:
        acc_lo, acc_hi = params["check.long_acc_range"]  # type: ignore[misc]
    else:
        acc_lo, acc_hi = PHYS_ACC_MIN, PHYS_ACC_MAX
    if adverse:
        ratio = float(params["speed.dec_long_acc_ratio"])
        acc_lo *= ratio
        acc_hi *= ratio
    brake = -acc_lo  # braking magnitude available to the planner

    dist_stop = float(params["dist.stop"]) * ef
    near_stop_kmh = float(params["speed.near_stop"])

    # speed caps
    caps = [
        float(params["speed.cruise"]),
        float(params["speed.max"]),
        float(params["speed.max_plan"]),
    ]
    if params["pref.comply_signs"]:
        caps.append(scene.segment.speed_limit)
    prep = float(params["dist.prep"]) * ef
    if _near_special_region(scene, prep):
        caps.append(float(params["speed.expect"]))
    if check_traj:
        caps.append(float(params["check.speed_range"][1]))  # type: ignore[index]
    if adverse:
        factor = float(params["speed.decrease_ratio"])
        caps = [c * factor for c in caps]
    target_kmh = min(caps)

    accel_pref: Optional[float] = None
    ramp = man.speed_ramp
    if ramp is not None:
        reached = (ramp.direction > 0 and v_kmh >= ramp.target_kmh - 0.5) or (
            ramp.direction < 0 and v_kmh <= ramp.target_kmh + 0.5
        )
        if reached:
            man.speed_ramp = None
        else:
            hard = min(float(params["speed.max"]), float(params["speed.max_plan"]))
            if params["pref.comply_signs"]:
                hard = min(hard, scene.segment.speed_limit)
            target_kmh = _clamp(ramp.target_kmh, 0.0, hard)
            accel_pref = ramp.accel

    # stop candidates (absolute positions) with their causes
    stop_candidates: list[tuple[float, str]] = []
    stop_reason_hold: Optional[str] = None

    if man.sticky_stop is not None:
        rate = min(_STOP_RATES[man.sticky_stop], brake)
        reason = "emergency" if man.sticky_stop == "emergency" else (
            "stop_cmd" if man.sticky_stop == "stop_cmd" else "pull_over"
        )
        if v <= STOP_SPEED_MS:
            return PlanDecision(
                _view(0.0, 0.0, KEEP, None, params), stop_reason=reason, holding=True
            )
        accel = -min(rate, brake if reason == "emergency" else rate)
        return PlanDecision(
            _view(0.0, accel, KEEP, None, params), stop_reason=reason
        )

    # obstacles: follow dynamic leads, stop for static blocks
    if params["pref.obstacle_dec"]:
        lead = _nearest_same_lane_ahead(scene)
        if lead is not None:
            gap = lead.distance
            if lead.speed < 1.0:
                buffer = float(params["dist.long_buffer"]) * ef
                stop_candidates.append((pos + gap - buffer, "obstacle"))
            else:
                follow = float(params["dist.follow"]) * ef
                if gap < follow:
                    match = max(0.0, lead.speed + 1.8 * (gap - follow))
                    target_kmh = min(target_kmh, match)

    # signals
    for sig in scene.signals:
        if sig.distance < -0.5:
            continue
        line = pos + sig.distance
        sp = line - dist_stop
        if sig.kind in ("red_light", "yellow_light"):
            d = sp - pos
            if d <= 0.0:
                continue  # past the stop point already: committed
            a_req = (v * v) / (2.0 * d) if d > 0 else math.inf
            if a_req > brake:
                continue  # cannot stop in time: proceed through
            stop_candidates.append((sp, "red_light"))
        elif sig.kind == "stop_sign" and sig.sid not in man.satisfied_stops:
            key = ("sign", sig.sid)
            release = man.wait_release.get(key)
            if release is not None:
                if now >= release:
                    man.satisfied_stops.add(sig.sid)
                    man.wait_release.pop(key, None)
                else:
                    stop_candidates.append((sp, "stop_sign"))
                    stop_reason_hold = "stop_sign"
            else:
                stop_candidates.append((sp, "stop_sign"))
                if v <= STOP_SPEED_MS and (sp - pos) <= dist_stop:
                    man.wait_release[key] = now + float(params["pref.wait_time"])

    # unsignalized intersection entries when the driver asked to stop there
    if params["pref.stop_no_sig"] and scene.next_intersection is not None:
        ix = scene.next_intersection
        if not ix.signalized:
            entry = pos + ix.distance
            key = ("ix", round(entry, 1))
            if key not in man.satisfied_stops:
                sp = entry - dist_stop
                release = man.wait_release.get(key)
                if release is not None and now >= release:
                    man.satisfied_stops.add(key)
                    man.wait_release.pop(key, None)
                else:
                    stop_candidates.append((sp, "stop_sign"))
                    if release is None and v <= STOP_SPEED_MS and (sp - pos) <= dist_stop:
                        man.wait_release[key] = now + float(params["pref.wait_time"])

    if man.park_position is not None:
        stop_candidates.append((man.park_position, "pull_over"))

    # stop only when the destination is the planner's business
    if params["pref.dest_pullover"] and destination is not None:
        stop_candidates.append((destination, "destination"))

    stop_point: Optional[float] = None
    stop_reason: Optional[str] = None
    for candidate, reason in stop_candidates:
        if candidate < pos - 0.6:
            continue
        if stop_point is None or candidate < stop_point:
            stop_point, stop_reason = candidate, reason

    lane_command = _lane_command(scene, params, man, now)

    if stop_point is not None:
        d = stop_point - pos
        if d <= 0.5 and v <= STOP_SPEED_MS:
            return PlanDecision(
                _view(0.0, 0.0, lane_command, stop_point, params),
                stop_reason=stop_reason_hold or stop_reason,
                holding=True,
            )
        if d <= 0.05:
            accel = _clamp(-v / dt, -brake, 0.0)
            return PlanDecision(
                _view(0.0, accel, lane_command, stop_point, params), stop_reason=stop_reason
            )
        if d > dist_stop:
            stop_cap = max(3.6 * math.sqrt(2.0 * COMFORT_DECEL * d), near_stop_kmh)
        else:
            stop_cap = 0.0
        target_kmh = min(target_kmh, stop_cap)
        if v_kmh > stop_cap + 0.5:
            a_req = (v * v) / (2.0 * d)
            accel = _clamp(-a_req, -brake, acc_hi)
        else:
            accel = _clamp((target_kmh / 3.6 - v) / dt, -brake, acc_hi)
        return PlanDecision(
            _view(target_kmh, accel, lane_command, stop_point, params), stop_reason=stop_reason
        )

    # free driving
    target_kmh = max(target_kmh, float(params["speed.min"]))
    if check_traj:
        lo, hi = params["check.speed_range"]  # type: ignore[misc]
        target_kmh = _clamp(target_kmh, float(lo), float(hi))
    accel = _clamp((target_kmh / 3.6 - v) / dt, acc_lo, acc_hi)
    if accel_pref is not None:
        accel = _clamp(accel, -abs(accel_pref), abs(accel_pref))
    return PlanDecision(_view(target_kmh, accel, lane_command, None, params))


def _view(
    target: float,
    accel: float,
    lane_command: str,
    stop_point: Optional[float],
    params: dict[str, Value],
) -> PlannerView:
    return PlannerView(
        target_speed=target,
        commanded_accel=accel,
        lane_command=lane_command,
        stop_point=stop_point,
        light_state=str(params["device.light_state"]),
        horn=bool(params["device.horn"]),
    )


def _nearest_same_lane_ahead(scene: Scene):
    best = None
    for obs in scene.obstacles:
        if obs.lane != scene.ego.lane or obs.distance <= 0:
            continue
        if best is None or obs.distance < best.distance:
            best = obs
    return best


def _near_special_region(scene: Scene, prep: float) -> bool:
    if scene.segment.kind == "intersection":
        return True
    if scene.next_intersection is not None and scene.next_intersection.distance <= prep:
        return True
    return any(0.0 <= sig.distance <= prep for sig in scene.signals)


def _lane_command(scene: Scene, params: dict[str, Value], man: ManoeuvreState, now: float) -> str:
    if man.change_side is not None:
        return CONTINUE_CHANGE
    if (
        man.pending_changes
        and not man.lane_follow_pin
        and now >= man.replanning_until
        and now - man.last_change_end >= float(params["pref.time_interval"])
    ):
        side = man.pending_changes[0]
        new_lane = scene.ego.lane + (1 if side == "left" else -1)
        if 0 <= new_lane < scene.segment.lanes:
            man.pending_changes.pop(0)
            man.change_side = side
            man.change_progress = 0.0
            return f"begin_change_{side}"
        man.pending_changes.pop(0)  # impossible change is dropped
    return KEEP
