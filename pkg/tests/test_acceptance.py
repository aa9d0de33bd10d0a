"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints one PASS/FAIL line; run with `pytest -s tests/test_acceptance.py`
to see them.
"""

from __future__ import annotations

import gc
import random
import time
from pathlib import Path

import pytest

from conftest import EXAMPLE_TEXTS
from udrive.bench import linear_fit, synthetic_program
from udrive.catalog import baseline_parameters, default_catalog
from udrive.compliance import evaluate
from udrive.diagnostics import has_errors
from udrive.formatter import format_program
from udrive.parser import parse_online_command, parse_program
from udrive.scene import Event
from udrive.scenario import load_scenario, scenario_from_dict
from udrive.sim import run_simulation
from udrive.tracefile import write_trace
from udrive.validate import validate_program

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
CAT = default_catalog()


def report(criterion: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"[{status}] {criterion}{suffix}")
    assert ok, f"{criterion}: {detail}"


# 1. parser corpus


def test_criterion_parser_corpus():
    start = time.perf_counter()
    ok = True
    detail = ""
    for name, text in EXAMPLE_TEXTS.items():
        result = parse_program(text)
        if result.program is None:
            ok, detail = False, f"{name} did not parse"
            break
        diags = validate_program(result.program, CAT)
        if has_errors(diags):
            ok, detail = False, f"{name} has validation errors"
            break
        if parse_program(format_program(result.program)).program != result.program:
            ok, detail = False, f"{name} does not round-trip"
            break
    elapsed = time.perf_counter() - start
    if ok and elapsed >= 1.0:
        ok, detail = False, f"corpus took {elapsed:.2f}s"
    report("parser corpus: examples parse, validate clean, round-trip, < 1 s",
           ok, detail or f"{elapsed * 1000:.0f} ms")


# 2. parse benchmark


def _interleaved_means(texts: list[str], reps: int) -> list[float]:
    """Mean parse time per text in ms, rounds interleaved across sizes.

    The slowest 10% of samples per size are dropped before averaging:
    timing noise is strictly right-tailed (descheduling, allocator spikes)
    and would otherwise dominate the ~5% deltas between adjacent sizes.
    """
    samples: list[list[float]] = [[] for _ in texts]
    for text in texts:
        parse_program(text)  # warmup
    gc.disable()
    try:
        for _ in range(reps):
            for i, text in enumerate(texts):
                begin = time.perf_counter()
                parse_program(text)
                samples[i].append(time.perf_counter() - begin)
    finally:
        gc.enable()
    means = []
    for sizes in samples:
        sizes.sort()
        kept = sizes[: max(1, int(len(sizes) * 0.9))]
        means.append(sum(kept) / len(kept) * 1000.0)
    return means


def test_criterion_parse_benchmark():
    rule_counts = list(range(1, 21))
    action_counts = list(range(1, 11))
    rule_means = _interleaved_means([synthetic_program(n, 3) for n in rule_counts], 60)
    action_means = _interleaved_means([synthetic_program(1, m) for m in action_counts], 100)

    mean_20x3 = rule_means[-1]
    mono_rules = all(b >= a for a, b in zip(rule_means, rule_means[1:]))
    mono_actions = all(b >= a for a, b in zip(action_means, action_means[1:]))
    _, r2_rules = linear_fit([float(n) for n in rule_counts], rule_means)
    _, r2_actions = linear_fit([float(m) for m in action_counts], action_means)

    ok = mean_20x3 < 50.0 and mono_rules and mono_actions and r2_rules > 0.9 and r2_actions > 0.9
    report(
        "parse benchmark: 20x3 mean < 50 ms, monotone sweeps, linear fit R^2 > 0.9",
        ok,
        f"20x3={mean_20x3:.2f} ms, mono_rules={mono_rules}, mono_actions={mono_actions}, "
        f"R2={r2_rules:.3f}/{r2_actions:.3f}",
    )


# 3. semantics property suite (>=100 randomized cases per property)


def test_criterion_semantics_properties(tmp_path):
    from test_properties import random_program_text, random_scenario, random_script, stepped_run

    start = time.perf_counter()

    for seed in range(100):  # (a) conflict rejection
        for sim, step, _ in stepped_run(seed):
            bound: dict[str, object] = {}
            for entry in sim.engine.active:
                for key, value in entry.bindings.items():
                    assert bound.setdefault(key, value) == value, (seed, step.tick, key)

    for seed in range(100):  # (b) exit removal restores baseline next tick
        prev = {}
        for sim, step, _ in stepped_run(seed):
            held = {k for e in sim.engine.active for k in e.bindings}
            overridden = set(sim.engine.params.override_keys())
            for key in prev:
                if key not in held and key not in overridden:
                    assert step.params[key] == sim.engine.params.baseline[key]
            prev = {k: v for e in sim.engine.active for k, v in e.bindings.items()}

    for seed in range(100):  # (c) online supremacy within the same tick
        written: dict[str, object] = {}
        for sim, step, _ in stepped_run(seed):
            for key in sim.engine.params.override_keys():
                written[key] = sim.engine.params.override_value(key)
            for key, value in written.items():
                assert step.params[key] == value
                for entry in sim.engine.active:
                    if key in entry.bindings:
                        assert entry.bindings[key] == value

    for seed in range(100):  # (d) byte-identical determinism
        rng = random.Random(seed)
        text = random_program_text(rng)
        scenario = random_scenario(rng)
        raw_script = random_script(rng, 150)
        script = [(t, c) for t, commands in sorted(raw_script.items()) for c in commands]
        blobs = []
        for run in range(2):
            trace = run_simulation(
                scenario, parse_program(text).program, command_script=script, max_ticks=150
            )
            path = tmp_path / "d.jsonl"
            write_trace(trace, path)
            blobs.append(path.read_bytes())
        assert blobs[0] == blobs[1], seed

    elapsed = time.perf_counter() - start
    report(
        "semantics properties: conflict rejection, exit restore, online supremacy, "
        "determinism over 100 randomized cases each, < 60 s",
        elapsed < 60.0,
        f"{elapsed:.1f} s",
    )


# 4. latency contract (exact, no tolerance)


def test_criterion_latency_contract():
    scn = scenario_from_dict(
        {"route": [{"kind": "normal", "length": 800, "lanes": 2, "speed_limit": 60}],
         "destination": 780},
        "latency",
    )
    script = [(50, parse_online_command("max_speed(20)", CAT))]
    trace = run_simulation(scn, None, command_script=script, max_ticks=300)
    by_tick = {s.tick: s for s in trace.steps}
    gamma_exact = (
        by_tick[49].planner.target_speed == 30.0
        and by_tick[50].planner.target_speed == 30.0
        and by_tick[50].params["speed.max"] == 20.0
        and by_tick[51].planner.target_speed == 20.0
    )

    script2 = [(50, parse_online_command("change_lane(left)", CAT))]
    trace2 = run_simulation(scn, None, command_script=script2, max_ticks=300)
    lane_by_tick = {s.tick: s.scene.ego.lane for s in trace2.steps}
    first_lane1 = min(t for t, lane in lane_by_tick.items() if lane == 1)
    # flip happens in the integration of tick 60: exactly 10 ticks after the
    # command tick, first visible in the tick-61 scene
    lane_ok = lane_by_tick[50] == 0 and lane_by_tick[60] == 0 and first_lane1 == 61
    finished = next(
        (s.tick for s in trace2.steps if Event("change_lane_finished") in s.events), None
    )
    lane_ok = lane_ok and finished == first_lane1
    report(
        "latency: parameter write visible in planner output at exactly t+1; "
        "lane change completes 10 ticks after the command",
        gamma_exact and lane_ok,
        f"gamma_exact={gamma_exact}, lane flip in tick-60 integration, event at {finished}",
    )


# 5. RQ2 directional reproduction, 20/20 deterministic runs per fixture


def _rq2_cases():
    base_s8 = str(FIXTURES / "defaults_s8.toml")
    stop_launch = [
        (330, parse_online_command("stop", CAT)),
        (450, parse_online_command("launch", CAT)),
    ]
    return [
        ("s5", "law38_sub3", None, "intersection_caution.udrv", None, None, 1400),
        ("s6", "law44", None, "fast_lane_pace.udrv", None, None, 1000),
        ("s8", "law46_sub2", base_s8, "adverse_weather_cap.udrv", base_s8, None, 1000),
        ("s10", "law53", None, None, None, stop_launch, 1400),
    ]


def test_criterion_rq2_directional():
    start = time.perf_counter()
    ok = True
    details = []
    for name, law, base_cfg, program_name, fix_cfg, fix_script, max_ticks in _rq2_cases():
        scn = load_scenario(FIXTURES / "scenarios" / f"{name}.yaml")
        program = None
        if program_name:
            text = (FIXTURES / "programs" / program_name).read_text()
            program = parse_program(text).program
        base_robs, fix_robs = set(), set()
        for _ in range(20):
            baseline = baseline_parameters(base_cfg) if base_cfg else None
            trace = run_simulation(scn, None, max_ticks=max_ticks, baseline=baseline)
            base_robs.add(evaluate(trace).check(law).robustness)
        for _ in range(20):
            baseline = baseline_parameters(fix_cfg) if fix_cfg else None
            trace = run_simulation(
                scn, program, command_script=fix_script, max_ticks=max_ticks, baseline=baseline
            )
            fix_robs.add(evaluate(trace).check(law).robustness)
        flips = (
            len(base_robs) == 1
            and len(fix_robs) == 1
            and next(iter(base_robs)) <= 0.0
            and next(iter(fix_robs)) > 0.0
        )
        details.append(
            f"{name}:{law} {next(iter(base_robs)):.1f}->{next(iter(fix_robs)):.1f}"
        )
        ok = ok and flips
    elapsed = time.perf_counter() - start
    if elapsed >= 30.0:
        ok = False
        details.append(f"took {elapsed:.1f}s")
    report(
        "RQ2 directional: S5/S6/S8/S10 baseline <= 0, intervention > 0, 20/20 runs, < 30 s",
        ok,
        "; ".join(details) + f"; {elapsed:.1f} s",
    )


# 6. example-1 behavioral check


def test_criterion_example1_window():
    program = parse_program(EXAMPLE_TEXTS["example1"]).program
    base_max = 90.0

    scn = load_scenario(FIXTURES / "scenarios" / "motorway.yaml")
    trace = run_simulation(scn, program, max_ticks=2000)
    enter = next(s.tick for s in trace.steps if Event("entering_motorway") in s.events)
    exit_ = next(s.tick for s in trace.steps if Event("exiting_motorway") in s.events)
    clear_ok = all(
        step.params["speed.max"] == (base_max + 10.0 if enter <= step.tick < exit_ else base_max)
        for step in trace.steps
    )

    rain = load_scenario(FIXTURES / "scenarios" / "motorway_rain.yaml")
    trace_rain = run_simulation(rain, program, max_ticks=2000)
    rain_ok = all(step.params["speed.max"] == base_max for step in trace_rain.steps)

    report(
        "example 1: speed.max = baseline + 10 exactly inside the motorway window; "
        "baseline throughout when raining",
        clear_ok and rain_ok,
        f"window=[{enter},{exit_}), rain_ok={rain_ok}",
    )


# 7. planner stopping-distance check


def test_criterion_planner_stopping():
    ok = True
    details = []
    for v in (20, 40, 60):
        scn = scenario_from_dict(
            {
                "route": [{"kind": "normal", "length": 400, "lanes": 1, "speed_limit": 100}],
                "signals": [{
                    "kind": "light", "position": 300,
                    "phases": [{"color": "red", "duration": 600}], "cycle": False,
                }],
                "destination": 390,
                "ego": {"start_speed": v},
            },
            f"stop{v}",
        )
        params = baseline_parameters()
        params.baseline["speed.cruise"] = float(v)
        trace = run_simulation(scn, None, max_ticks=1200, baseline=params)
        final = trace.steps[-1].scene.ego
        stop_point = 300.0 - 1.0
        error = final.position - stop_point
        good = final.speed == 0.0 and abs(error) <= 0.5 and final.position <= 300.0
        details.append(f"v={v}: err={error:+.3f} m")
        ok = ok and good
    report(
        "planner stopping: final position within 0.5 m of (line - stop distance) "
        "for 20/40/60 km/h",
        ok,
        "; ".join(details),
    )
