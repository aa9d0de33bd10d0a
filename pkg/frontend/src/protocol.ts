/**
 * Wire messages for the bridge websocket.
 *
 * The JSON contract lives in docs/wire_schema.json at the repository root;
 * both the server tests and this console's tests validate against it.
 */

export interface HelloMessage {
  type: "hello";
  scenario: { name: string; destination: number; length?: number };
  tick_s: number;
  catalog: { events: string[]; conditions: string[]; actions: string[] };
  paused?: boolean;
  pace?: number;
}

export interface StepScene {
  weather: { raining: boolean; foggy: boolean; snowing: boolean; light_level: number };
  ego: { position: number; lane: number; speed: number; accel: number; maneuver: string };
  segment: { kind: string; speed_limit: number; lanes: number; jam: boolean };
  obstacles: Array<{ kind: string; distance: number; lane: number; speed: number }>;
  signals: Array<{ sid: number; kind: string; distance: number; value: number | null }>;
  next_intersection: {
    distance: number;
    length: number;
    jam: boolean;
    signalized: boolean;
  } | null;
}

export interface StepData {
  tick: number;
  time: number;
  scene: StepScene;
  events: Array<string | { id: string; arg: number }>;
  params: Record<string, unknown>;
  active_rules: string[];
  rejected_rules: string[];
  planner: {
    target_speed: number;
    commanded_accel: number;
    lane_command: string;
    stop_point: number | null;
    light_state: string;
    horn: boolean;
  };
}

export interface StepMessage {
  type: "step";
  step: StepData;
}

export interface RuleSetMessage {
  type: "rule_set";
  rules: Array<{ name: string; text: string }>;
  active: string[];
}

export interface AckMessage {
  type: "ack";
  id: string | number | null;
  ok: boolean;
  diagnostic?: string;
  tick?: number;
}

export interface EndMessage {
  type: "end";
  outcome: "pass" | "violation" | "collision" | "timeout";
  reason: string;
  ticks: number;
  compliance?: Record<string, unknown>;
}

export type ServerMessage =
  | HelloMessage
  | StepMessage
  | RuleSetMessage
  | AckMessage
  | EndMessage;

export interface CommandMessage {
  type: "command";
  id: string | number;
  text: string;
}

export type ClientMessage =
  | CommandMessage
  | { type: "pause" }
  | { type: "resume" }
  | { type: "set_pace"; factor: number };

export class ProtocolError extends Error {}

function fail(reason: string): never {
  throw new ProtocolError(reason);
}

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

export function parseServerMessage(raw: string): ServerMessage {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    fail("message is not JSON");
  }
  if (!isRecord(data) || typeof data.type !== "string") {
    fail("message has no type tag");
  }
  switch (data.type) {
    case "hello": {
      if (!isRecord(data.scenario) || typeof data.tick_s !== "number" || !isRecord(data.catalog)) {
        fail("malformed hello");
      }
      return data as unknown as HelloMessage;
    }
    case "step": {
      const step = data.step;
      if (
        !isRecord(step) ||
        typeof step.tick !== "number" ||
        typeof step.time !== "number" ||
        !isRecord(step.scene) ||
        !Array.isArray(step.events) ||
        !isRecord(step.params) ||
        !Array.isArray(step.active_rules) ||
        !isRecord(step.planner)
      ) {
        fail("malformed step");
      }
      return data as unknown as StepMessage;
    }
    case "rule_set": {
      if (!Array.isArray(data.rules) || !Array.isArray(data.active)) {
        fail("malformed rule_set");
      }
      return data as unknown as RuleSetMessage;
    }
    case "ack": {
      if (!("id" in data) || typeof data.ok !== "boolean") {
        fail("malformed ack");
      }
      return data as unknown as AckMessage;
    }
    case "end": {
      if (
        typeof data.outcome !== "string" ||
        typeof data.reason !== "string" ||
        typeof data.ticks !== "number"
      ) {
        fail("malformed end");
      }
      return data as unknown as EndMessage;
    }
    default:
      fail(`unknown message type ${String(data.type)}`);
  }
}
