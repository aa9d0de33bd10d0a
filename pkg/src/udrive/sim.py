"""Fixed-step simulation loop (100 ms ticks).

Per tick: build the scene from ground truth, derive events, plan with the
parameters visible at the end of the previous tick (one-cycle latency), run
the engine update, then integrate the vehicle.  Terminates at destination,
collision, or the tick limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from udrive import ast
from udrive.catalog import Catalog, default_catalog
from udrive.commands import OnlineCommand
from udrive.engine import Engine
from udrive.params import ParameterStore
from udrive.planner import (
    CONTINUE_CHANGE,
    LANE_CHANGE_DURATION,
    ManoeuvreState,
    PlanDecision,
    STOP_SPEED_MS,
    plan_step,
)
from udrive.scene import (
    CHANGING_LANE,
    EMERGENCY,
    EgoView,
    Event,
    IntersectionView,
    LANE_FOLLOW,
    ObstacleView,
    PARKED,
    PULLING_OVER,
    Scene,
    SegmentView,
    SignalView,
    STOPPED,
    TraceStep,
    WeatherView,
    derive_events,
)
from udrive.scenario import Scenario

OUTCOME_PASS = "pass"
OUTCOME_COLLISION = "collision"
OUTCOME_TIMEOUT = "timeout"

REASON_DESTINATION = "destination_reached"
REASON_COLLISION = "collision"
REASON_MAX_TICKS = "max_ticks"

_DESTINATION_SLACK = 0.75


@dataclass
class VehicleState:
    position: float
    lane: int
    speed: float  # km/h
    accel: float = 0.0
    maneuver: str = LANE_FOLLOW
    lane_change_progress: float = 0.0
    stopped_reason: Optional[str] = None


@dataclass
class Trace:
    steps: list[TraceStep] = field(default_factory=list)
    reason: str = REASON_MAX_TICKS
    scenario_name: str = ""

    @property
    def ticks(self) -> int:
        return len(self.steps)


def build_scene(
    scenario: Scenario, veh: VehicleState, t: float, detection_range: float
) -> Scene:
    raining, foggy, snowing, light = scenario.weather_at(t)
    segment, seg_start = scenario.segment_at(veh.position)
    seg_view = SegmentView(
        kind=segment.kind,
        speed_limit=segment.speed_limit,
        lanes=segment.lanes,
        jam=segment.jam_at(t),
        fast_lane_min=segment.fast_lane_min,
    )

    obstacles = []
    for obs in scenario.obstacles:
        if not obs.present_at(t):
            continue
        distance = obs.position_at(t) - veh.position
        if abs(distance) <= detection_range:
            obstacles.append(ObstacleView(obs.kind, distance, obs.lane, obs.speed))

    signals = []
    for sig in scenario.signals:
        distance = sig.position - veh.position
        if -20.0 <= distance <= detection_range:
            if sig.kind == "light":
                kind = f"{sig.color_at(t)}_light"
            else:
                kind = sig.kind
            signals.append(SignalView(sig.sid, kind, distance, sig.value))

    next_ix = None
    found = scenario.next_intersection(veh.position)
    if found is not None:
        ix_distance, ix_segment = found
        if ix_distance <= detection_range:
            ix_start = veh.position + ix_distance
            signalized = any(
                sig.kind == "light" and abs(sig.position - ix_start) <= 5.0
                for sig in scenario.signals
            )
            next_ix = IntersectionView(
                distance=ix_distance,
                length=ix_segment.length,
                jam=ix_segment.jam_at(t),
                signalized=signalized,
            )

    return Scene(
        time=round(t, 6),
        weather=WeatherView(raining, foggy, snowing, light),
        ego=EgoView(veh.position, veh.lane, veh.speed, veh.accel, veh.maneuver),
        segment=seg_view,
        obstacles=tuple(obstacles),
        signals=tuple(signals),
        next_intersection=next_ix,
    )


def integrate(
    veh: VehicleState, decision: PlanDecision, dt: float, man: ManoeuvreState
) -> VehicleState:
    """Forward-Euler kinematics with trapezoidal position update."""
    view = decision.view
    v0 = veh.speed / 3.6
    if decision.holding:
        v1 = 0.0
        accel = 0.0
    else:
        accel = view.commanded_accel
        v1 = max(0.0, v0 + accel * dt)
        if v1 <= STOP_SPEED_MS and view.target_speed == 0.0:
            v1 = 0.0
    position = veh.position + (v0 + v1) / 2.0 * dt

    lane = veh.lane
    progress = veh.lane_change_progress
    if man.change_side is not None:
        progress += dt / LANE_CHANGE_DURATION
        if progress >= 1.0 - 1e-9:
            lane += 1 if man.change_side == "left" else -1
            man.change_side = None
            progress = 0.0

    stopped = v1 == 0.0
    if stopped and decision.stop_reason is not None:
        reason = decision.stop_reason
        maneuver = {
            "emergency": EMERGENCY,
            "pull_over": PULLING_OVER,
        }.get(reason, STOPPED)
        if man.park_position is not None and reason == "pull_over":
            maneuver = PARKED
        stopped_reason = reason
    elif man.change_side is not None or view.lane_command.startswith("begin_change"):
        maneuver = CHANGING_LANE
        stopped_reason = None
    elif decision.stop_reason == "emergency":
        maneuver = EMERGENCY
        stopped_reason = None
    elif decision.stop_reason == "pull_over" and not stopped:
        maneuver = PULLING_OVER
        stopped_reason = None
    else:
        maneuver = LANE_FOLLOW
        stopped_reason = None

    return VehicleState(
        position=position,
        lane=lane,
        speed=v1 * 3.6,
        accel=accel,
        maneuver=maneuver,
        lane_change_progress=progress,
        stopped_reason=stopped_reason,
    )


def _collision(prev_scene: Optional[Scene], scene: Scene) -> bool:
    if prev_scene is None:
        return False
    prev = {
        (o.kind, o.lane): o.distance
        for o in prev_scene.obstacles
        if o.lane == prev_scene.ego.lane
    }
    for obs in scene.obstacles:
        if obs.lane != scene.ego.lane:
            continue
        if abs(obs.distance) < 0.01:
            return True
        before = prev.get((obs.kind, obs.lane))
        if before is None:
            continue
        if (before > 0 >= obs.distance) or (before < 0 <= obs.distance):
            return True
    return False


class Simulation:
    """Incrementally stepped run; `run_simulation` and the live bridge share it.

    One `step()` = one 100 ms tick: scene, events, plan (with the previous
    tick's parameters: one-cycle command latency), engine update, integrate.
    """

    def __init__(
        self,
        scenario: Scenario,
        program: ast.Program | None,
        max_ticks: int = 3000,
        catalog: Catalog | None = None,
        baseline: ParameterStore | None = None,
    ):
        from udrive.catalog import baseline_parameters

        self.scenario = scenario
        self.max_ticks = max_ticks
        cat = catalog or default_catalog()
        params = baseline if baseline is not None else baseline_parameters()
        self.engine = Engine(program if program is not None else ast.Program(()), cat, params)
        self.vehicle = VehicleState(
            position=scenario.ego.position, lane=scenario.ego.lane, speed=scenario.ego.speed
        )
        self.man = ManoeuvreState()
        self.planner_params = self.engine.params.snapshot()
        self.prev_scene: Optional[Scene] = None
        self.trace = Trace(scenario_name=scenario.name)
        self.tick = 0
        self.finished = False
        self.last_command_results = ()

    @property
    def done(self) -> bool:
        return self.finished

    def step(self, online: list[OnlineCommand] | None = None) -> TraceStep:
        if self.finished:
            raise RuntimeError("simulation already finished")
        scenario = self.scenario
        dt = scenario.tick_s
        tick = self.tick
        t = tick * dt
        detection = float(self.planner_params["dist.check"])
        scene = build_scene(scenario, self.vehicle, t, detection)

        events = set(derive_events(self.prev_scene, scene, detection))
        reached = scene.ego.position >= scenario.destination - _DESTINATION_SLACK
        if reached:
            events.add(Event("destination_reached"))
        events_frozen = frozenset(events)

        decision = plan_step(scene, self.planner_params, self.man, dt, scenario.destination)
        record = self.engine.step(scene, events_frozen, list(online or []))
        self.last_command_results = record.command_results

        step = TraceStep(
            tick=tick,
            scene=scene,
            events=events_frozen,
            params=record.params,
            active_rules=record.active,
            planner=decision.view,
            rejected_rules=record.rejected,
            notes=record.notes,
        )
        self.trace.steps.append(step)

        if _collision(self.prev_scene, scene):
            self.trace.reason = REASON_COLLISION
            self.finished = True
            return step
        if reached:
            self.trace.reason = REASON_DESTINATION
            self.finished = True
            return step

        lane_before = self.vehicle.lane
        self.vehicle = integrate(self.vehicle, decision, dt, self.man)
        if self.vehicle.lane != lane_before:
            self.man.last_change_end = t + dt
        for command in record.new_manoeuvres:
            self.man.enqueue(command, t + dt)
        self.planner_params = record.params
        self.prev_scene = scene

        self.tick += 1
        if self.tick >= self.max_ticks:
            self.trace.reason = REASON_MAX_TICKS
            self.finished = True
        return step


def run_simulation(
    scenario: Scenario,
    program: ast.Program | None,
    command_script: list[tuple[int, OnlineCommand]] | None = None,
    max_ticks: int = 3000,
    catalog: Catalog | None = None,
    baseline: ParameterStore | None = None,
) -> Trace:
    """Deterministic full run; failures are trace outcomes, not errors."""
    script: dict[int, list[OnlineCommand]] = {}
    for tick, command in command_script or []:
        script.setdefault(tick, []).append(command)

    sim = Simulation(scenario, program, max_ticks=max_ticks, catalog=catalog, baseline=baseline)
    while not sim.done:
        sim.step(script.get(sim.tick))
    return sim.trace
