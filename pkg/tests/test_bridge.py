"""Bridge integration tests over an in-process websocket client."""

import json
import time
from pathlib import Path

from starlette.testclient import TestClient

from udrive.bridge import BridgeServer, create_app
from udrive.parser import parse_online_command
from udrive.scenario import load_scenario
from udrive.sim import run_simulation
from udrive.tracefile import write_trace

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def make_server(scenario="clear", pace=200.0, start_paused=False, max_ticks=1400, program=None):
    scn = load_scenario(FIXTURES / "scenarios" / f"{scenario}.yaml")
    return BridgeServer(
        scn, program, pace=pace, max_ticks=max_ticks, start_paused=start_paused
    )


def drain_until(ws, predicate, limit=4000):
    """Read messages until predicate matches; returns (match, seen)."""
    seen = []
    for _ in range(limit):
        message = ws.receive_json()
        seen.append(message)
        if predicate(message):
            return message, seen
    raise AssertionError("message not found")


def test_hello_and_rule_set_on_connect():
    server = make_server()
    with TestClient(create_app(server)) as client:
        with client.websocket_connect("/ws") as ws:
            hello = ws.receive_json()
            assert hello["type"] == "hello"
            assert hello["scenario"]["name"] == "clear"
            assert "stop" in hello["catalog"]["actions"]
            rules = ws.receive_json()
            assert rules["type"] == "rule_set"
            assert rules["rules"] == []


def test_server_messages_conform_to_wire_schema():
    import jsonschema

    schema = json.loads(
        (Path(__file__).resolve().parent.parent / "docs" / "wire_schema.json").read_text()
    )
    validator = jsonschema.Draft202012Validator(schema)
    from udrive.parser import parse_program
    from conftest import EXAMPLE_1

    program = parse_program(EXAMPLE_1).program
    server = make_server(scenario="clear", max_ticks=60, program=program)
    with TestClient(create_app(server)) as client:
        with client.websocket_connect("/ws") as ws:
            ws.send_json({"type": "command", "id": "c1", "text": "follow_dist(12)"})
            ws.send_json({"type": "command", "id": "c2", "text": "bogus()"})
            seen_types = set()
            while "end" not in seen_types:
                message = ws.receive_json()
                validator.validate(message)
                seen_types.add(message["type"])
    assert {"hello", "rule_set", "step", "ack", "end"} <= seen_types


def test_steps_strictly_tick_ordered_and_end():
    server = make_server(max_ticks=120)
    with TestClient(create_app(server)) as client:
        with client.websocket_connect("/ws") as ws:
            ticks = []
            end = None
            while True:
                message = ws.receive_json()
                if message["type"] == "step":
                    ticks.append(message["step"]["tick"])
                elif message["type"] == "end":
                    end = message
                    break
            assert ticks == sorted(ticks)
            assert ticks == list(range(ticks[0], ticks[-1] + 1))
            assert end["outcome"] == "timeout"
            assert end["ticks"] == 120


def test_command_acked_and_decel_begins_next_tick():
    server = make_server(max_ticks=600)
    with TestClient(create_app(server)) as client:
        with client.websocket_connect("/ws") as ws:
            drain_until(ws, lambda m: m["type"] == "step" and m["step"]["tick"] >= 30)
            ws.send_json({"type": "command", "id": "c1", "text": "stop"})
            ack, _ = drain_until(ws, lambda m: m["type"] == "ack")
            assert ack["id"] == "c1" and ack["ok"] is True
            t = ack["tick"]
            after, _ = drain_until(
                ws, lambda m: m["type"] == "step" and m["step"]["tick"] == t + 1
            )
            assert after["step"]["planner"]["commanded_accel"] < 0
            assert after["step"]["planner"]["target_speed"] == 0.0


def test_malformed_command_gets_diagnostic_ack_and_sim_unaffected():
    server = make_server(max_ticks=200)
    with TestClient(create_app(server)) as client:
        with client.websocket_connect("/ws") as ws:
            ws.send_json({"type": "command", "id": 7, "text": "warp_speed(9)"})
            ack, _ = drain_until(ws, lambda m: m["type"] == "ack")
            assert ack["id"] == 7 and ack["ok"] is False
            assert "warp_speed" in ack["diagnostic"]
            end, _ = drain_until(ws, lambda m: m["type"] == "end")
            assert end["reason"] == "max_ticks"  # ran to its limit


def test_ack_completeness_one_per_command():
    server = make_server(max_ticks=400)
    with TestClient(create_app(server)) as client:
        with client.websocket_connect("/ws") as ws:
            for i in range(5):
                ws.send_json({"type": "command", "id": i, "text": "follow_dist(12)"})
            acks = []

            def collect(m):
                if m["type"] == "ack":
                    acks.append(m["id"])
                return m["type"] == "end"

            drain_until(ws, collect)
            assert sorted(acks) == [0, 1, 2, 3, 4]


def test_conflicting_writes_same_tick_later_arrival_wins():
    server = make_server(start_paused=True, max_ticks=120)
    with TestClient(create_app(server)) as client:
        with client.websocket_connect("/ws") as ws1, client.websocket_connect("/ws") as ws2:
            ws1.receive_json(), ws1.receive_json()
            ws2.receive_json(), ws2.receive_json()
            ws1.send_json({"type": "command", "id": "a", "text": "max_speed(50)"})
            time.sleep(0.25)
            ws2.send_json({"type": "command", "id": "b", "text": "max_speed(70)"})
            time.sleep(0.25)
            ws1.send_json({"type": "resume"})
            ack1, seen1 = drain_until(ws1, lambda m: m["type"] == "ack")
            assert ack1["ok"]
            ack2, _ = drain_until(ws2, lambda m: m["type"] == "ack")
            assert ack2["ok"]
            assert ack1["tick"] == ack2["tick"] == 0
            step, _ = drain_until(ws1, lambda m: m["type"] == "step")
            assert step["step"]["params"]["speed.max"] == 70.0


def test_pause_resume_keeps_ticks_continuous():
    server = make_server(pace=50.0, max_ticks=200)
    with TestClient(create_app(server)) as client:
        with client.websocket_connect("/ws") as ws:
            drain_until(ws, lambda m: m["type"] == "step" and m["step"]["tick"] >= 10)
            ws.send_json({"type": "pause"})
            time.sleep(0.3)
            ws.send_json({"type": "resume"})
            ticks = []

            def collect(m):
                if m["type"] == "step":
                    ticks.append(m["step"]["tick"])
                return m["type"] == "end"

            drain_until(ws, collect)
            assert ticks == list(range(ticks[0], ticks[-1] + 1))


def test_paused_command_applies_first_post_resume_tick():
    server = make_server(start_paused=True, max_ticks=120)
    with TestClient(create_app(server)) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_json(), ws.receive_json()
            ws.send_json({"type": "command", "id": "x", "text": "max_speed(42)"})
            time.sleep(0.2)
            ws.send_json({"type": "resume"})
            ack, _ = drain_until(ws, lambda m: m["type"] == "ack")
            assert ack["tick"] == 0  # nothing ran while paused
            step, _ = drain_until(ws, lambda m: m["type"] == "step")
            assert step["step"]["tick"] == 0
            assert step["step"]["params"]["speed.max"] == 42.0


def test_bad_pace_rejected():
    server = make_server(max_ticks=100)
    with TestClient(create_app(server)) as client:
        with client.websocket_connect("/ws") as ws:
            ws.send_json({"type": "set_pace", "factor": -1})
            ack, _ = drain_until(ws, lambda m: m["type"] == "ack")
            assert ack["ok"] is False


def test_rule_set_changes_broadcast():
    server = make_server(max_ticks=300)
    with TestClient(create_app(server)) as client:
        with client.websocket_connect("/ws") as ws:
            ws.send_json(
                {
                    "type": "command",
                    "id": "add",
                    "text": 'rule "added"\ntrigger always\nthen\nfollow_dist(30)\nend',
                }
            )
            update, _ = drain_until(
                ws, lambda m: m["type"] == "rule_set" and m["rules"]
            )
            assert update["rules"][0]["name"] == "added"
            active, _ = drain_until(
                ws, lambda m: m["type"] == "rule_set" and "added" in m["active"]
            )
            assert active["active"] == ["added"]


def test_trace_equivalence_with_command_script(tmp_path):
    """A live session equals cmd_run fed the same (tick, text) script."""
    server = make_server(scenario="s10", pace=400.0, max_ticks=1400)
    with TestClient(create_app(server)) as client:
        with client.websocket_connect("/ws") as ws:
            drain_until(ws, lambda m: m["type"] == "step" and m["step"]["tick"] >= 40)
            ws.send_json({"type": "command", "id": "stop", "text": "stop"})
            ack_stop, _ = drain_until(ws, lambda m: m["type"] == "ack")
            assert ack_stop["ok"]
            drain_until(
                ws,
                lambda m: m["type"] == "step"
                and m["step"]["scene"]["ego"]["speed"] == 0.0,
            )
            drain_until(
                ws,
                lambda m: m["type"] == "step" and m["step"]["time"] > 41.0,
            )
            ws.send_json({"type": "command", "id": "launch", "text": "launch"})
            ack_launch, _ = drain_until(ws, lambda m: m["type"] == "ack")
            assert ack_launch["ok"]
            drain_until(ws, lambda m: m["type"] == "end")

    live_trace = server.sim.trace
    scn = load_scenario(FIXTURES / "scenarios" / "s10.yaml")
    cat = server.catalog
    script = [
        (ack_stop["tick"], parse_online_command("stop", cat)),
        (ack_launch["tick"], parse_online_command("launch", cat)),
    ]
    offline = run_simulation(scn, None, command_script=script, max_ticks=1400)

    live_path = tmp_path / "live.jsonl"
    offline_path = tmp_path / "offline.jsonl"
    write_trace(live_trace, live_path)
    write_trace(offline, offline_path)
    assert live_path.read_bytes() == offline_path.read_bytes()
