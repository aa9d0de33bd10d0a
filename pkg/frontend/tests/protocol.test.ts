// Protocol guards must agree with docs/wire_schema.json: every message the
// schema marks required-field-complete parses, and stripping any required
// field makes parsing fail.

import { readFileSync } from "node:fs";
import { resolve, dirname } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { ProtocolError, parseServerMessage } from "../src/protocol.js";

const here = dirname(fileURLToPath(import.meta.url));
const schemaPath = resolve(here, "..", "..", "docs", "wire_schema.json");
const schema = JSON.parse(readFileSync(schemaPath, "utf-8"));

const samples: Record<string, object> = {
  hello: {
    type: "hello",
    scenario: { name: "s5", destination: 480, length: 500 },
    tick_s: 0.1,
    catalog: { events: ["always"], conditions: ["is_raining"], actions: ["stop"] },
    paused: false,
    pace: 1,
  },
  step: {
    type: "step",
    step: {
      tick: 3,
      time: 0.3,
      scene: {
        weather: { raining: false, foggy: false, snowing: false, light_level: 1 },
        ego: { position: 2.5, lane: 0, speed: 30, accel: 0, maneuver: "lane_follow" },
        segment: { kind: "normal", speed_limit: 60, lanes: 1, jam: false, fast_lane_min: null },
        obstacles: [],
        signals: [],
        next_intersection: null,
      },
      events: ["always", { id: "limit_detected", arg: 50 }],
      params: { "speed.max": 90 },
      active_rules: [],
      rejected_rules: [],
      planner: {
        target_speed: 30,
        commanded_accel: 0,
        lane_command: "keep",
        stop_point: null,
        light_state: "off",
        horn: false,
      },
    },
  },
  rule_set: { type: "rule_set", rules: [{ name: "a", text: "rule ..." }], active: ["a"] },
  ack: { type: "ack", id: "c1", ok: true, tick: 12 },
  end: { type: "end", outcome: "pass", reason: "destination_reached", ticks: 500 },
};

// minimal structural validation against the schema's required lists
function requiredFields(defName: string): string[] {
  return schema.$defs[defName].required as string[];
}

describe("wire schema agreement", () => {
  it("covers every server message the schema defines", () => {
    const serverDefs = ["hello", "step", "rule_set", "ack", "end"];
    for (const name of serverDefs) {
      expect(schema.$defs[name]).toBeDefined();
      expect(samples[name]).toBeDefined();
    }
  });

  it("samples satisfy the schema's required fields", () => {
    for (const [name, sample] of Object.entries(samples)) {
      for (const field of requiredFields(name)) {
        expect(sample, `${name}.${field}`).toHaveProperty(field);
      }
    }
  });

  it("parses every valid sample", () => {
    for (const sample of Object.values(samples)) {
      const parsed = parseServerMessage(JSON.stringify(sample));
      expect(parsed.type).toBe((sample as { type: string }).type);
    }
  });

  it("rejects samples with a required field removed", () => {
    for (const [name, sample] of Object.entries(samples)) {
      for (const field of requiredFields(name)) {
        if (field === "type") continue;
        const broken: Record<string, unknown> = { ...(sample as object) } as never;
        delete broken[field];
        expect(
          () => parseServerMessage(JSON.stringify(broken)),
          `${name} without ${field}`,
        ).toThrow(ProtocolError);
      }
    }
  });

  it("rejects non-JSON and unknown tags", () => {
    expect(() => parseServerMessage("not json")).toThrow(ProtocolError);
    expect(() => parseServerMessage('{"type": "mystery"}')).toThrow(ProtocolError);
    expect(() => parseServerMessage('{"no": "type"}')).toThrow(ProtocolError);
  });

  it("client command shape matches the schema", () => {
    const required = requiredFields("command");
    expect(required.sort()).toEqual(["id", "text", "type"]);
  });
});
