"""Live service mode: wall-clock-paced simulation over a websocket.

Any number of clients connect to /ws; their commands merge into one
arrival-ordered queue drained at tick boundaries, so pacing never changes
semantics.  Every command gets exactly one ack carrying the tick it was
admitted for; steps stream in strict tick order.  Slow clients are dropped
rather than stalling the loop.
"""

from __future__ import annotations

import asyncio
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from starlette.staticfiles import StaticFiles

from udrive import ast
from udrive.catalog import Catalog, default_catalog
from udrive.commands import OnlineCommand
from udrive.compliance import evaluate
from udrive.formatter import format_rule
from udrive.params import ParameterStore
from udrive.parser import OnlineCommandError, parse_online_command
from udrive.scenario import Scenario
from udrive.sim import Simulation
from udrive.tracefile import step_to_obj


@dataclass
class _PendingCommand:
    client_id: int
    command_id: object
    command: OnlineCommand


@dataclass
class _Client:
    ws: WebSocket
    cid: int
    queue: asyncio.Queue = field(default_factory=lambda: asyncio.Queue(maxsize=512))


class BridgeServer:
    def __init__(
        self,
        scenario: Scenario,
        program: Optional[ast.Program],
        pace: float = 1.0,
        max_ticks: int = 3000,
        catalog: Optional[Catalog] = None,
        baseline: Optional[ParameterStore] = None,
        start_paused: bool = False,
        out_dir: Optional[str] = None,
    ):
        self.catalog = catalog or default_catalog()
        self.out_dir = out_dir
        self.sim = Simulation(
            scenario, program, max_ticks=max_ticks, catalog=self.catalog, baseline=baseline
        )
        self.pace = pace
        self.paused = start_paused
        self._resume = asyncio.Event()
        if not start_paused:
            self._resume.set()
        self._commands: list[_PendingCommand] = []
        self._clients: list[_Client] = []
        self._next_cid = 0
        self._lock = asyncio.Lock()
        self._ended = False
        self._last_rule_state: Optional[tuple] = None

    # ---- message builders

    def hello_message(self) -> dict:
        return {
            "type": "hello",
            "scenario": {
                "name": self.sim.scenario.name,
                "destination": self.sim.scenario.destination,
                "length": self.sim.scenario.total_length,
            },
            "tick_s": self.sim.scenario.tick_s,
            "catalog": {
                "events": sorted(self.catalog.events),
                "conditions": sorted(self.catalog.conditions),
                "actions": sorted(self.catalog.actions),
            },
            "paused": self.paused,
            "pace": self.pace,
        }

    def rule_set_message(self) -> dict:
        return {
            "type": "rule_set",
            "rules": [
                {"name": rule.name, "text": format_rule(rule)} for rule in self.sim.engine.rules
            ],
            "active": list(self.sim.engine.active_names()),
        }

    def end_message(self) -> dict:
        report = evaluate(self.sim.trace)
        return {
            "type": "end",
            "outcome": report.outcome,
            "reason": self.sim.trace.reason,
            "ticks": self.sim.trace.ticks,
            "compliance": report.to_json_obj(),
        }

    # ---- client plumbing

    async def _send(self, client: _Client, message: dict) -> None:
        try:
            client.queue.put_nowait(message)
        except asyncio.QueueFull:
            await self._drop(client)

    async def _broadcast(self, message: dict) -> None:
        for client in list(self._clients):
            await self._send(client, message)

    async def _drop(self, client: _Client) -> None:
        if client in self._clients:
            self._clients.remove(client)
        try:
            await client.ws.close()
        except Exception:
            pass

    async def _writer(self, client: _Client) -> None:
        while True:
            message = await client.queue.get()
            await client.ws.send_text(json.dumps(message, separators=(",", ":")))

    # ---- the simulation loop

    async def run_loop(self) -> None:
        try:
            await self._run_loop_inner()
        finally:
            if self.sim.done and self.out_dir is not None:
                self._write_outputs()

    def _write_outputs(self) -> None:
        from udrive.tracefile import write_trace

        out = Path(self.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_trace(self.sim.trace, out / "trace.jsonl")
        report = evaluate(self.sim.trace)
        (out / "compliance.json").write_text(report.to_json() + "\n", encoding="utf-8")

    async def _run_loop_inner(self) -> None:
        while not self.sim.done:
            await self._resume.wait()
            tick_started = asyncio.get_running_loop().time()

            async with self._lock:
                pending = self._commands
                self._commands = []
            commands = [p.command for p in pending]
            admitted_tick = self.sim.tick

            step = self.sim.step(commands)

            for p, result in zip(pending, self.sim.last_command_results):
                ack = {
                    "type": "ack",
                    "id": p.command_id,
                    "ok": result.ok,
                    "tick": admitted_tick,
                }
                if not result.ok:
                    ack["diagnostic"] = result.message
                client = next((c for c in self._clients if c.cid == p.client_id), None)
                if client is not None:
                    await self._send(client, ack)

            await self._broadcast({"type": "step", "step": step_to_obj(step)})

            rule_state = (
                tuple(r.name for r in self.sim.engine.rules),
                self.sim.engine.active_names(),
            )
            if rule_state != self._last_rule_state:
                self._last_rule_state = rule_state
                await self._broadcast(self.rule_set_message())

            wall = self.sim.scenario.tick_s / self.pace
            elapsed = asyncio.get_running_loop().time() - tick_started
            delay = wall - elapsed
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                await asyncio.sleep(0)

        self._ended = True
        await self._broadcast(self.end_message())

    # ---- client-side message handling

    async def handle_client_message(self, client: _Client, raw: str) -> None:
        try:
            obj = json.loads(raw)
            mtype = obj.get("type")
        except json.JSONDecodeError:
            await self._send(
                client,
                {"type": "ack", "id": None, "ok": False, "diagnostic": "not JSON"},
            )
            return

        if mtype == "command":
            cid = obj.get("id")
            text = obj.get("text", "")
            try:
                command = parse_online_command(text, self.catalog)
            except OnlineCommandError as exc:
                await self._send(
                    client,
                    {
                        "type": "ack",
                        "id": cid,
                        "ok": False,
                        "diagnostic": exc.diagnostic.message,
                    },
                )
                return
            if self._ended:
                await self._send(
                    client,
                    {"type": "ack", "id": cid, "ok": False, "diagnostic": "simulation ended"},
                )
                return
            async with self._lock:
                self._commands.append(_PendingCommand(client.cid, cid, command))
        elif mtype == "pause":
            self.paused = True
            self._resume.clear()
        elif mtype == "resume":
            self.paused = False
            self._resume.set()
        elif mtype == "set_pace":
            factor = obj.get("factor")
            if not isinstance(factor, (int, float)) or factor <= 0:
                await self._send(
                    client,
                    {
                        "type": "ack",
                        "id": obj.get("id"),
                        "ok": False,
                        "diagnostic": "pace factor must be positive",
                    },
                )
                return
            self.pace = float(factor)
        # unknown types are ignored

    async def websocket_endpoint(self, ws: WebSocket) -> None:
        await ws.accept()
        self._next_cid += 1
        client = _Client(ws, self._next_cid)
        self._clients.append(client)
        writer = asyncio.create_task(self._writer(client))
        try:
            await self._send(client, self.hello_message())
            await self._send(client, self.rule_set_message())
            if self._ended:
                await self._send(client, self.end_message())
            while True:
                raw = await ws.receive_text()
                await self.handle_client_message(client, raw)
        except WebSocketDisconnect:
            pass
        finally:
            writer.cancel()
            if client in self._clients:
                self._clients.remove(client)


def create_app(server: BridgeServer, static_dir: Optional[str] = None) -> FastAPI:
    from contextlib import asynccontextmanager

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(server.run_loop())
        yield
        task.cancel()
        try:
            await task
        except asyncio.CancelledError:
            pass

    app = FastAPI(title="udrive bridge", lifespan=lifespan)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await server.websocket_endpoint(ws)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="console")

    return app


def serve(
    scenario: Scenario,
    program: Optional[ast.Program],
    host: str = "127.0.0.1",
    port: int = 8710,
    pace: float = 1.0,
    max_ticks: int = 3000,
    baseline: Optional[ParameterStore] = None,
    static_dir: Optional[str] = None,
    start_paused: bool = False,
    out_dir: Optional[str] = None,
) -> None:
    import uvicorn

    server = BridgeServer(
        scenario,
        program,
        pace=pace,
        max_ticks=max_ticks,
        baseline=baseline,
        start_paused=start_paused,
        out_dir=out_dir,
    )
    app = create_app(server, static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
