// Console loop against a real bridge: drive the S5 approach with pause /
// stop / resume / launch from the console session, then check that the
// live trace is byte-identical to `udrive run` with the equivalent
// tick-stamped command script, and that every command got exactly one ack.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { Session } from "../src/session.js";

const here = dirname(fileURLToPath(import.meta.url));
const repoRoot = resolve(here, "..", "..");
const scenario = join(repoRoot, "fixtures", "scenarios", "s5.yaml");

const PORT = 8861;
let server: ChildProcess | null = null;

function startBridge(outDir: string): ChildProcess {
  return spawn(
    "python3",
    [
      "-m", "udrive.cli", "serve",
      "--scenario", scenario,
      "--port", String(PORT),
      "--pace", "200",
      "--max-ticks", "1400",
      "--start-paused",
      "--out", outDir,
    ],
    { cwd: repoRoot, stdio: ["ignore", "pipe", "pipe"] },
  );
}

function connectWithRetry(url: string, deadlineMs: number): Promise<WebSocket> {
  const started = Date.now();
  return new Promise((resolvePromise, rejectPromise) => {
    const attempt = () => {
      const socket = new WebSocket(url);
      socket.on("open", () => resolvePromise(socket));
      socket.on("error", () => {
        socket.close();
        if (Date.now() - started > deadlineMs) {
          rejectPromise(new Error("bridge never came up"));
        } else {
          setTimeout(attempt, 200);
        }
      });
    };
    attempt();
  });
}

afterAll(() => {
  server?.kill("SIGKILL");
});

describe("console loop against the live bridge", () => {
  it(
    "stop/launch session equals the scripted run, one ack per command",
    { timeout: 120_000 },
    async () => {
      const liveOut = mkdtempSync(join(tmpdir(), "udrive-live-"));
      const scriptOut = mkdtempSync(join(tmpdir(), "udrive-script-"));
      server = startBridge(liveOut);
      const stderr: string[] = [];
      server.stderr?.on("data", (chunk) => stderr.push(String(chunk)));

      const socket = await connectWithRetry(`ws://127.0.0.1:${PORT}/ws`, 30_000);
      const session = new Session((message) => socket.send(JSON.stringify(message)));

      let finished: () => void = () => undefined;
      const done = new Promise<void>((resolvePromise) => {
        finished = resolvePromise;
      });

      // scripted "human": pause at the approach, stop, resume, launch
      // after the halt, all through session user actions
      let phase: "approach" | "stopping" | "halted" | "running" = "approach";
      session.onChange(() => {
        const step = session.latestStep;
        if (!step) return;
        if (phase === "approach" && step.scene.ego.position >= 200) {
          phase = "stopping";
          session.pause();
          session.sendCommand("stop");
          session.resume();
        } else if (phase === "stopping" && step.scene.ego.speed === 0) {
          phase = "halted";
          session.sendCommand("launch");
          phase = "running";
        }
        if (session.end) finished();
      });

      socket.on("message", (data) => session.handleRaw(String(data)));
      session.resume(); // user starts the paused session

      await done;
      socket.close();

      // exactly one ack per issued command
      expect(session.commands.length).toBe(2);
      for (const command of session.commands) {
        expect(command.state).toBe("ok");
        expect(typeof command.tick).toBe("number");
      }
      expect(session.end?.outcome).toBe("pass");

      // give the server a beat to flush outputs, then stop it
      await new Promise((resolvePromise) => setTimeout(resolvePromise, 1500));
      server?.kill("SIGTERM");
      await new Promise((resolvePromise) => setTimeout(resolvePromise, 500));

      // replay the same commands at the acked ticks through the CLI
      const scriptPath = join(scriptOut, "commands.jsonl");
      const lines = session.commands
        .map((command) => JSON.stringify({ tick: command.tick, command: command.text }))
        .join("\n");
      writeFileSync(scriptPath, lines + "\n");

      const run = spawnSync(
        "python3",
        [
          "-m", "udrive.cli", "run",
          "--scenario", scenario,
          "--commands", scriptPath,
          "--out", scriptOut,
          "--max-ticks", "1400",
        ],
        { cwd: repoRoot, encoding: "utf-8" },
      );
      expect(run.status, run.stderr).toBe(0);

      const liveTrace = readFileSync(join(liveOut, "trace.jsonl"));
      const scriptTrace = readFileSync(join(scriptOut, "trace.jsonl"));
      expect(liveTrace.equals(scriptTrace), `stderr: ${stderr.join("")}`).toBe(true);
    },
  );
});
