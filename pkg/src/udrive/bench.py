"""Parse-time benchmarking over synthetic programs.

Generates programs with a given rule count and actions-per-rule, times
``parse_program`` in-process, and reports means plus a linear-fit slope.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from udrive.parser import parse_program

_TRIGGERS = [
    "entering_motorway", "rain_started", "vehicle_detected",
    "red_light_detected", "entering_tunnel", "always",
]
_CONDITIONS = ["!is_raining", "is_motorway", "!is_foggy", "is_jam", "is_night"]
_ACTIONS = [
    "max_speed(50)", "follow_dist(25)", "cruise_speed(35)", "prep_dist(80)",
    "expect_speed(20)", "long_buffer_dist(6)", "near_stop_speed(4)",
    "wait_time(3)", "max_plan_speed(70)", "stop_dist(2)",
]


def synthetic_program(rules: int, actions_per_rule: int, conditions_per_rule: int = 2) -> str:
    blocks = []
    for i in range(rules):
        lines = [f'rule "generated rule {i}"', f"trigger {_TRIGGERS[i % len(_TRIGGERS)]}"]
        if conditions_per_rule:
            conds = " ".join(
                _CONDITIONS[(i + j) % len(_CONDITIONS)] for j in range(conditions_per_rule)
            )
            lines.append(f"condition {conds}")
        lines.append("then")
        for j in range(actions_per_rule):
            lines.append(f"    {_ACTIONS[(i + j) % len(_ACTIONS)]}")
        lines.append("until exiting_motorway")
        lines.append("end")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


@dataclass
class BenchPoint:
    rules: int
    actions: int
    mean_ms: float
    max_ms: float


@dataclass
class BenchReport:
    by_rules: list[BenchPoint]
    by_actions: list[BenchPoint]
    rules_slope_ms: float
    rules_r2: float
    actions_slope_ms: float
    actions_r2: float


def time_parse(text: str, repetitions: int) -> tuple[float, float]:
    """Mean and max wall time (ms) of parsing `text`."""
    samples = []
    for _ in range(repetitions):
        start = time.perf_counter()
        result = parse_program(text)
        elapsed = (time.perf_counter() - start) * 1000.0
        if result.program is None:
            raise RuntimeError("synthetic program failed to parse")
        samples.append(elapsed)
    return sum(samples) / len(samples), max(samples)


def linear_fit(xs: list[float], ys: list[float]) -> tuple[float, float]:
    """Least-squares slope and R^2."""
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = sxy / sxx if sxx else 0.0
    intercept = mean_y - slope * mean_x
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    r2 = 1.0 - ss_res / ss_tot if ss_tot else 1.0
    return slope, r2


def run_bench(
    rule_counts: list[int],
    action_counts: list[int],
    repetitions: int,
    actions_for_rule_sweep: int = 3,
    rules_for_action_sweep: int = 1,
) -> BenchReport:
    if repetitions <= 0:
        raise ValueError("repetitions must be positive")

    by_rules = []
    for n in rule_counts:
        mean_ms, max_ms = time_parse(
            synthetic_program(n, actions_for_rule_sweep), repetitions
        )
        by_rules.append(BenchPoint(n, actions_for_rule_sweep, mean_ms, max_ms))

    by_actions = []
    for m in action_counts:
        mean_ms, max_ms = time_parse(synthetic_program(rules_for_action_sweep, m), repetitions)
        by_actions.append(BenchPoint(rules_for_action_sweep, m, mean_ms, max_ms))

    r_slope, r_r2 = linear_fit(
        [float(p.rules) for p in by_rules], [p.mean_ms for p in by_rules]
    )
    a_slope, a_r2 = linear_fit(
        [float(p.actions) for p in by_actions], [p.mean_ms for p in by_actions]
    )
    return BenchReport(by_rules, by_actions, r_slope, r_r2, a_slope, a_r2)


def render_report(report: BenchReport) -> str:
    lines = ["rules sweep (3 actions each):"]
    for p in report.by_rules:
        lines.append(f"  {p.rules:3d} rules: mean {p.mean_ms:8.3f} ms  max {p.max_ms:8.3f} ms")
    lines.append(
        f"  fit: {report.rules_slope_ms:.4f} ms/rule, R^2 = {report.rules_r2:.4f}"
    )
    lines.append("actions sweep (1 rule):")
    for p in report.by_actions:
        lines.append(f"  {p.actions:3d} actions: mean {p.mean_ms:8.3f} ms  max {p.max_ms:8.3f} ms")
    lines.append(
        f"  fit: {report.actions_slope_ms:.4f} ms/action, R^2 = {report.actions_r2:.4f}"
    )
    return "\n".join(lines)
