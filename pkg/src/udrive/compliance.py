"""Built-in traffic-rule robustness checks over completed traces.

Robustness is a signed distance from violating a rule: <= 0 means the rule
was violated.  Units are meters for line-margin checks and km/h for speed
checks.  A checker that never becomes applicable reports "n/a" (infinity).

Entry-margin checks use a 0.5 m convention: a vehicle that comes to a stop
just short of the line ("barely avoided" entry) scores 0.5 rather than its
raw geometric margin, mirroring how waiting at the line is scored.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from udrive.scene import SignalView, TraceStep
from udrive.sim import (
    OUTCOME_COLLISION,
    OUTCOME_PASS,
    OUTCOME_TIMEOUT,
    REASON_COLLISION,
    REASON_DESTINATION,
    REASON_MAX_TICKS,
    Trace,
)

OUTCOME_VIOLATION = "violation"

NA = math.inf

STOPPED_KMH = 0.36  # 0.1 m/s

APPROACH_RANGE = 100.0  # a phase only counts if the ego got this close


@dataclass(frozen=True)
class LawCheck:
    id: str
    robustness: float
    context: str = ""

    @property
    def violated(self) -> bool:
        return self.robustness <= 0.0

    @property
    def applicable(self) -> bool:
        return self.robustness != NA


@dataclass
class ComplianceReport:
    checks: list[LawCheck] = field(default_factory=list)
    outcome: str = OUTCOME_PASS
    reason: str = ""
    violated: int = 0
    applicable: int = 0

    def check(self, law_id: str) -> LawCheck:
        for check in self.checks:
            if check.id == law_id:
                return check
        raise KeyError(law_id)

    def to_json_obj(self) -> dict:
        return {
            "outcome": self.outcome,
            "reason": self.reason,
            "violated": self.violated,
            "applicable": self.applicable,
            "checks": [
                {
                    "id": c.id,
                    "robustness": None if c.robustness == NA else round(c.robustness, 3),
                    "violated": c.violated if c.applicable else False,
                    "context": c.context,
                }
                for c in self.checks
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2)

    def render_table(self) -> str:
        rows = [("Law", "Pass", "Robustness", "Context")]
        for c in self.checks:
            if not c.applicable:
                rob = "n/a"
                ok = "-"
            else:
                rob = f"{c.robustness:.1f}"
                ok = "no" if c.violated else "yes"
            rows.append((c.id, ok, rob, c.context))
        widths = [max(len(row[i]) for row in rows) for i in range(4)]
        lines = []
        for i, row in enumerate(rows):
            lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
            if i == 0:
                lines.append("  ".join("-" * widths[j] for j in range(4)))
        return "\n".join(lines)


class IncompleteTrace(Exception):
    pass


def _light_color(kind: str) -> Optional[str]:
    if kind.endswith("_light"):
        return kind[: -len("_light")]
    return None


def _signal_track(steps: list[TraceStep]) -> dict[int, list[tuple[int, SignalView, TraceStep]]]:
    """Per signal id, the (tick, view, step) sequence where it was visible."""
    track: dict[int, list[tuple[int, SignalView, TraceStep]]] = {}
    for step in steps:
        for sig in step.scene.signals:
            track.setdefault(sig.sid, []).append((step.tick, sig, step))
    return track


def rob_entry_margin(
    samples: list[tuple[float, float, bool]], dist_stop: float
) -> float:
    """Signed stop margin for one forbidden phase.

    samples: (distance to line, speed km/h, forbidden) per tick in order.
    Crossing the line while forbidden is <= 0; a stop just short of the
    line scores 0.5; otherwise the minimum approach distance in meters.
    """
    runs: list[list[tuple[float, float]]] = []
    current: list[tuple[float, float]] = []
    for distance, speed, forbidden in samples:
        if forbidden:
            current.append((distance, speed))
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)

    best = NA
    for run in runs:
        if run[0][0] < 0:
            continue  # already past the line when the phase began
        candidate = NA
        min_d = NA
        stopped_short = False
        for distance, speed in run:
            if distance < 0:
                candidate = distance
                break
            min_d = min(min_d, distance)
            if speed <= STOPPED_KMH and distance <= dist_stop + 0.5:
                stopped_short = True
        if candidate is NA:
            if stopped_short:
                candidate = 0.5
            elif min_d <= APPROACH_RANGE:
                candidate = min_d
        if candidate is not NA:
            best = min(best, candidate)
    return best


def rob_red_light(trace: Trace, colors: tuple[str, ...] = ("red",)) -> float:
    """Minimum signed stop margin over phases that forbid entry."""
    steps = trace.steps
    if not steps:
        return NA
    dist_stop = float(steps[0].params.get("dist.stop", 1.0))
    best = NA
    for _sid, seq in sorted(_signal_track(steps).items()):
        samples = []
        for _tick, sig, step in seq:
            color = _light_color(sig.kind)
            if color is None:
                continue
            samples.append((sig.distance, step.scene.ego.speed, color in colors))
        if samples:
            best = min(best, rob_entry_margin(samples, dist_stop))
    return best


def rob_speed(trace: Trace, cap_fn: Callable[[TraceStep], Optional[float]]) -> float:
    """Min over steps of (cap - speed) where the cap applies."""
    best = NA
    for step in trace.steps:
        cap = cap_fn(step)
        if cap is None:
            continue
        best = min(best, cap - step.scene.ego.speed)
    return best


def _in_intersection(step: TraceStep) -> bool:
    return step.scene.segment.kind == "intersection"


def _entry_ticks(steps: list[TraceStep]) -> list[int]:
    """Indexes where the ego transitions into an intersection segment."""
    out = []
    for i, step in enumerate(steps):
        if _in_intersection(step) and (i == 0 or not _in_intersection(steps[i - 1])):
            out.append(i)
    return out


def _entry_color(steps: list[TraceStep], idx: int) -> Optional[str]:
    """Traffic light color governing the intersection entry at steps[idx]."""
    for back in range(idx, max(-1, idx - 30), -1):
        for sig in steps[back].scene.signals:
            color = _light_color(sig.kind)
            if color is not None and -20.0 <= sig.distance <= 30.0:
                return color
    return None


def _min_gap_inside(trace: Trace, entry_filter) -> float:
    steps = trace.steps
    best = NA
    for idx in _entry_ticks(steps):
        if not entry_filter(steps, idx):
            continue
        j = idx
        while j < len(steps) and _in_intersection(steps[j]):
            step = steps[j]
            for obs in step.scene.obstacles:
                if obs.lane == step.scene.ego.lane and obs.distance >= -0.5:
                    best = min(best, obs.distance)
            j += 1
    if best is not NA and trace.reason == REASON_COLLISION:
        best = min(best, 0.0)
    return best


def law38_sub1(trace: Trace) -> LawCheck:
    rob = _min_gap_inside(trace, lambda steps, idx: _entry_color(steps, idx) == "green")
    return LawCheck("law38_sub1", rob, "Green light")


def law38_sub2(trace: Trace) -> LawCheck:
    return LawCheck("law38_sub2", rob_red_light(trace, ("yellow",)), "Yellow light")


def law38_sub3(trace: Trace) -> LawCheck:
    return LawCheck("law38_sub3", rob_red_light(trace, ("red",)), "Red light")


def law44(trace: Trace) -> LawCheck:
    best = NA
    for step in trace.steps:
        seg = step.scene.segment
        if seg.fast_lane_min is None or seg.lanes < 2:
            continue
        if step.scene.ego.lane == seg.lanes - 1:
            best = min(best, step.scene.ego.speed - seg.fast_lane_min)
    return LawCheck("law44", best, "Fast lane minimum speed")


_ADVERSE_CAP = 30.0


def law46_sub2(trace: Trace) -> LawCheck:
    rob = rob_speed(
        trace,
        lambda step: _ADVERSE_CAP
        if step.scene.weather.raining or step.scene.weather.snowing
        else None,
    )
    return LawCheck("law46_sub2", rob, "Rain/snow speed cap")


def law46_sub3(trace: Trace) -> LawCheck:
    rob = rob_speed(trace, lambda step: _ADVERSE_CAP if step.scene.weather.foggy else None)
    return LawCheck("law46_sub3", rob, "Fog speed cap")


def law51_sub4(trace: Trace) -> LawCheck:
    """When stopping for a red light, the stop must be behind the line."""
    best = NA
    for _sid, seq in sorted(_signal_track(trace.steps).items()):
        for _tick, sig, step in seq:
            if _light_color(sig.kind) != "red":
                continue
            if step.scene.ego.speed <= STOPPED_KMH:
                best = min(best, sig.distance)
    return LawCheck("law51_sub4", best, "Stop behind the line on red")


def law51_sub5(trace: Trace) -> LawCheck:
    """Do not come to rest inside a signalized intersection."""
    best = NA
    steps = trace.steps
    for idx in _entry_ticks(steps):
        if _entry_color(steps, idx) is None:
            continue
        j = idx
        while j < len(steps) and _in_intersection(steps[j]):
            best = min(best, steps[j].scene.ego.speed)
            j += 1
    return LawCheck("law51_sub5", best, "Keep moving inside the intersection")


def law52(trace: Trace) -> LawCheck:
    rob = _min_gap_inside(trace, lambda steps, idx: _entry_color(steps, idx) is None)
    return LawCheck("law52", rob, "Unsignalized intersection clearance")


def law53(trace: Trace) -> LawCheck:
    """Do not enter a jammed intersection, green light notwithstanding."""
    steps = trace.steps
    if not steps:
        return LawCheck("law53", NA, "Jammed intersection")
    dist_stop = float(steps[0].params.get("dist.stop", 1.0))
    samples = []
    for step in steps:
        ix = step.scene.next_intersection
        if _in_intersection(step):
            # inside: a negative distance marks the line as crossed
            samples.append((-1.0, step.scene.ego.speed, step.scene.segment.jam))
        elif ix is not None:
            samples.append((ix.distance, step.scene.ego.speed, ix.jam))
    rob = rob_entry_margin(samples, dist_stop)
    return LawCheck("law53", rob, "Jammed intersection")


ALL_CHECKS = (
    law38_sub1,
    law38_sub2,
    law38_sub3,
    law44,
    law46_sub2,
    law46_sub3,
    law51_sub4,
    law51_sub5,
    law52,
    law53,
)


def evaluate(trace: Trace) -> ComplianceReport:
    """Run every built-in checker; raises IncompleteTrace on a bare trace."""
    if trace.reason not in (REASON_DESTINATION, REASON_COLLISION, REASON_MAX_TICKS):
        raise IncompleteTrace(f"trace has no valid termination record: {trace.reason!r}")
    if not trace.steps:
        raise IncompleteTrace("trace has no steps")

    checks = [check(trace) for check in ALL_CHECKS]
    report = ComplianceReport(checks=checks, reason=trace.reason)
    report.applicable = sum(1 for c in checks if c.applicable)
    report.violated = sum(1 for c in checks if c.applicable and c.violated)

    if trace.reason == REASON_COLLISION:
        report.outcome = OUTCOME_COLLISION
    elif report.violated:
        report.outcome = OUTCOME_VIOLATION
    elif trace.reason == REASON_DESTINATION:
        report.outcome = OUTCOME_PASS
    else:
        report.outcome = OUTCOME_TIMEOUT
    return report
