/**
 * Session state for one bridge connection.
 *
 * Pure view over the message stream: the only outgoing messages come from
 * the explicit user-action methods (sendCommand/pause/resume/setPace); the
 * handshake is the connection itself. Steps are kept in a 600-entry ring
 * (60 s at 100 ms ticks) and the rendered tick never runs ahead of the
 * last received step.
 */

import {
  AckMessage,
  ClientMessage,
  EndMessage,
  HelloMessage,
  ProtocolError,
  ServerMessage,
  StepData,
  parseServerMessage,
} from "./protocol.js";

export const STEP_CAPACITY = 600;

export type SessionStatus = "connecting" | "connected" | "ended" | "closed" | "error";

export interface PendingCommand {
  id: string;
  text: string;
  state: "pending" | "ok" | "failed";
  diagnostic?: string;
  tick?: number;
}

export interface RuleEntry {
  name: string;
  text: string;
  active: boolean;
}

export type SendFn = (message: ClientMessage) => void;

export class Session {
  status: SessionStatus = "connecting";
  banner: string | null = null;
  hello: HelloMessage | null = null;
  end: EndMessage | null = null;
  steps: StepData[] = [];
  rules: RuleEntry[] = [];
  commands: PendingCommand[] = [];
  paused = false;
  pace = 1;
  lastTick = -1;
  protocolErrors = 0;

  /** every message this session ever sent, for the pure-view property */
  readonly sent: ClientMessage[] = [];

  private nextCommandId = 1;
  private readonly sendFn: SendFn;
  private readonly listeners: Array<() => void> = [];

  constructor(sendFn: SendFn) {
    this.sendFn = sendFn;
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** The tick safe to render; never exceeds the last received step. */
  get renderedTick(): number {
    return this.lastTick;
  }

  get latestStep(): StepData | null {
    return this.steps.length ? this.steps[this.steps.length - 1] : null;
  }

  /** Effective parameters that differ from the first-seen (baseline) set. */
  paramDiff(): Array<[string, unknown]> {
    const latest = this.latestStep;
    if (!latest || !this.baselineParams) return [];
    const out: Array<[string, unknown]> = [];
    for (const [key, value] of Object.entries(latest.params)) {
      const base = this.baselineParams[key];
      if (JSON.stringify(value) !== JSON.stringify(base)) {
        out.push([key, value]);
      }
    }
    return out;
  }

  private baselineParams: Record<string, unknown> | null = null;

  // ---- inbound

  handleRaw(raw: string): void {
    let message: ServerMessage;
    try {
      message = parseServerMessage(raw);
    } catch (err) {
      if (err instanceof ProtocolError) {
        this.protocolErrors += 1;
        this.banner = `protocol error: ${err.message}`;
        this.notify();
        return;
      }
      throw err;
    }
    this.handleMessage(message);
  }

  handleMessage(message: ServerMessage): void {
    switch (message.type) {
      case "hello":
        this.hello = message;
        this.status = "connected";
        this.paused = Boolean(message.paused);
        this.pace = message.pace ?? 1;
        this.banner = null;
        break;
      case "step": {
        const step = message.step;
        if (step.tick <= this.lastTick) break; // defensive: never rewind
        if (this.baselineParams === null) {
          this.baselineParams = { ...step.params };
        }
        this.steps.push(step);
        if (this.steps.length > STEP_CAPACITY) {
          this.steps.splice(0, this.steps.length - STEP_CAPACITY);
        }
        this.lastTick = step.tick;
        const activeSet = new Set(step.active_rules);
        for (const rule of this.rules) rule.active = activeSet.has(rule.name);
        break;
      }
      case "rule_set":
        this.rules = message.rules.map((rule) => ({
          name: rule.name,
          text: rule.text,
          active: message.active.includes(rule.name),
        }));
        break;
      case "ack":
        this.resolveAck(message);
        break;
      case "end":
        this.end = message;
        this.status = "ended";
        break;
    }
    this.notify();
  }

  private resolveAck(ack: AckMessage): void {
    const entry = this.commands.find(
      (command) => command.id === ack.id && command.state === "pending",
    );
    if (!entry) return;
    entry.state = ack.ok ? "ok" : "failed";
    entry.diagnostic = ack.diagnostic;
    entry.tick = ack.tick;
  }

  get pendingCount(): number {
    return this.commands.filter((command) => command.state === "pending").length;
  }

  // ---- user actions (the only senders)

  private send(message: ClientMessage): void {
    this.sent.push(message);
    this.sendFn(message);
  }

  sendCommand(text: string): PendingCommand {
    const id = `c${this.nextCommandId++}`;
    const entry: PendingCommand = { id, text, state: "pending" };
    this.commands.push(entry);
    this.send({ type: "command", id, text });
    this.notify();
    return entry;
  }

  pause(): void {
    this.paused = true;
    this.send({ type: "pause" });
    this.notify();
  }

  resume(): void {
    this.paused = false;
    this.send({ type: "resume" });
    this.notify();
  }

  setPace(factor: number): void {
    this.pace = factor;
    this.send({ type: "set_pace", factor });
    this.notify();
  }

  // ---- connection lifecycle

  markClosed(reason: string): void {
    if (this.status !== "ended") {
      this.status = "closed";
      this.banner = reason;
    }
    this.notify();
  }

  markError(reason: string): void {
    this.status = "error";
    this.banner = reason;
    this.notify();
  }
}
