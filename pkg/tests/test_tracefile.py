import pytest

from udrive.parser import parse_program
from udrive.scenario import load_scenario
from udrive.sim import run_simulation
from udrive.tracefile import CorruptTrace, IncompleteTrace, read_trace, write_trace
from conftest import EXAMPLE_1


def test_write_read_roundtrip(tmp_path, fixtures_dir):
    scn = load_scenario(fixtures_dir / "scenarios" / "s5.yaml")
    program = parse_program(EXAMPLE_1).program
    trace = run_simulation(scn, program, max_ticks=200)
    path = tmp_path / "trace.jsonl"
    write_trace(trace, path)
    loaded = read_trace(path)
    assert loaded.reason == trace.reason
    assert loaded.ticks == trace.ticks
    for a, b in zip(loaded.steps, trace.steps):
        assert a.tick == b.tick
        assert a.events == b.events
        assert a.active_rules == b.active_rules
        assert abs(a.scene.ego.position - b.scene.ego.position) <= 0.0011


def test_floats_have_three_decimals(tmp_path, fixtures_dir):
    scn = load_scenario(fixtures_dir / "scenarios" / "clear.yaml")
    trace = run_simulation(scn, None, max_ticks=50)
    path = tmp_path / "trace.jsonl"
    write_trace(trace, path)
    import json
    import re

    for line in path.read_text().splitlines():
        for num in re.findall(r"-?\d+\.\d+", line):
            whole, frac = num.split(".")
            assert len(frac) <= 3, line
        json.loads(line)


def test_missing_end_record_raises(tmp_path, fixtures_dir):
    scn = load_scenario(fixtures_dir / "scenarios" / "clear.yaml")
    trace = run_simulation(scn, None, max_ticks=20)
    path = tmp_path / "trace.jsonl"
    write_trace(trace, path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")  # drop the end record
    with pytest.raises(IncompleteTrace):
        read_trace(path)


def test_corrupt_line_reports_line_number(tmp_path, fixtures_dir):
    scn = load_scenario(fixtures_dir / "scenarios" / "clear.yaml")
    trace = run_simulation(scn, None, max_ticks=20)
    path = tmp_path / "trace.jsonl"
    write_trace(trace, path)
    lines = path.read_text().splitlines()
    lines[4] = lines[4][:-10]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(CorruptTrace) as exc:
        read_trace(path)
    assert exc.value.line_no == 5
