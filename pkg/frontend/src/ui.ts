/**
 * DOM rendering for the driver console: speed/position strip, signal and
 * rule panels, parameter overrides, and the command log. Render functions
 * are passive; all outgoing traffic goes through Session user actions
 * wired to buttons and the command input.
 */

import { StepData } from "./protocol.js";
import { Session } from "./session.js";

export interface Panels {
  banner: HTMLElement;
  status: HTMLElement;
  strip: HTMLCanvasElement;
  position: HTMLElement;
  signals: HTMLElement;
  rules: HTMLElement;
  params: HTMLElement;
  commandLog: HTMLElement;
}

export function renderBanner(session: Session, el: HTMLElement): void {
  if (session.banner) {
    el.textContent = session.banner;
    el.classList.remove("hidden");
  } else {
    el.classList.add("hidden");
  }
}

export function renderStatus(session: Session, el: HTMLElement): void {
  const step = session.latestStep;
  const bits = [
    `status: ${session.status}`,
    session.paused ? "paused" : `pace x${session.pace}`,
  ];
  if (step) {
    bits.push(
      `tick ${step.tick}`,
      `t ${step.time.toFixed(1)}s`,
      `${step.scene.ego.speed.toFixed(1)} km/h`,
      `lane ${step.scene.ego.lane}`,
      step.scene.segment.kind,
    );
  }
  if (session.end) {
    bits.push(`ended: ${session.end.outcome} (${session.end.reason})`);
  }
  el.textContent = bits.join("  |  ");
}

export function renderStrip(session: Session, canvas: HTMLCanvasElement): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const steps = session.steps;
  if (!steps.length) return;

  const maxSpeed = Math.max(40, ...steps.map((s) => s.scene.ego.speed)) * 1.15;
  const x = (i: number) => (i / Math.max(1, steps.length - 1)) * (width - 8) + 4;
  const ySpeed = (v: number) => height - 4 - (v / maxSpeed) * (height - 8);

  ctx.strokeStyle = "#4cc2ff";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  steps.forEach((step, i) => {
    const px = x(i);
    const py = ySpeed(step.scene.ego.speed);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();

  ctx.strokeStyle = "#ffb454";
  ctx.setLineDash([4, 3]);
  ctx.beginPath();
  steps.forEach((step, i) => {
    const px = x(i);
    const py = ySpeed(step.planner.target_speed);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
  ctx.setLineDash([]);
}

export function renderPosition(session: Session, el: HTMLElement): void {
  const step = session.latestStep;
  const hello = session.hello;
  if (!step || !hello) {
    el.textContent = "";
    return;
  }
  const length = hello.scenario.length ?? hello.scenario.destination;
  const frac = Math.min(1, step.scene.ego.position / Math.max(1, length));
  const destFrac = Math.min(1, hello.scenario.destination / Math.max(1, length));
  el.innerHTML = "";
  const bar = document.createElement("div");
  bar.className = "posbar";
  const ego = document.createElement("div");
  ego.className = "posbar-ego";
  ego.style.left = `${(frac * 100).toFixed(2)}%`;
  const dest = document.createElement("div");
  dest.className = "posbar-dest";
  dest.style.left = `${(destFrac * 100).toFixed(2)}%`;
  bar.append(dest, ego);
  el.append(bar);
  const label = document.createElement("div");
  label.className = "dim";
  label.textContent = `${step.scene.ego.position.toFixed(1)} m of ${length.toFixed(0)} m`;
  el.append(label);
}

export function renderSignals(step: StepData | null, el: HTMLElement): void {
  el.innerHTML = "";
  if (!step) return;
  const ahead = step.scene.signals.filter((sig) => sig.distance >= 0);
  if (!ahead.length && !step.scene.next_intersection) {
    el.textContent = "no signals in range";
    return;
  }
  for (const sig of ahead) {
    const row = document.createElement("div");
    row.className = `signal signal-${sig.kind}`;
    const label = sig.kind === "limit" ? `limit ${sig.value}` : sig.kind.replace("_", " ");
    row.textContent = `${label} in ${sig.distance.toFixed(0)} m`;
    el.append(row);
  }
  const ix = step.scene.next_intersection;
  if (ix) {
    const row = document.createElement("div");
    row.className = "signal";
    row.textContent = `intersection in ${ix.distance.toFixed(0)} m${ix.jam ? " (jammed)" : ""}`;
    el.append(row);
  }
}

export function renderRules(session: Session, el: HTMLElement): void {
  el.innerHTML = "";
  if (!session.rules.length) {
    el.textContent = "no rules loaded";
    return;
  }
  for (const rule of session.rules) {
    const item = document.createElement("details");
    item.className = rule.active ? "rule rule-active" : "rule";
    const summary = document.createElement("summary");
    summary.textContent = `${rule.active ? "● " : "○ "}${rule.name}`;
    const body = document.createElement("pre");
    body.textContent = rule.text;
    item.append(summary, body);
    el.append(item);
  }
}

export function renderParams(session: Session, el: HTMLElement): void {
  el.innerHTML = "";
  const diff = session.paramDiff();
  if (!diff.length) {
    el.textContent = "all parameters at baseline";
    return;
  }
  const table = document.createElement("table");
  for (const [key, value] of diff) {
    const row = document.createElement("tr");
    const k = document.createElement("td");
    k.textContent = key;
    const v = document.createElement("td");
    v.textContent = JSON.stringify(value);
    row.append(k, v);
    table.append(row);
  }
  el.append(table);
}

export function renderCommandLog(session: Session, el: HTMLElement): void {
  el.innerHTML = "";
  for (const command of [...session.commands].reverse().slice(0, 20)) {
    const row = document.createElement("div");
    row.className = `cmd cmd-${command.state}`;
    let suffix = "";
    if (command.state === "ok") suffix = ` ✓ tick ${command.tick ?? "?"}`;
    if (command.state === "failed") suffix = ` ✗ ${command.diagnostic ?? "rejected"}`;
    if (command.state === "pending") suffix = " …";
    row.textContent = `${command.text}${suffix}`;
    el.append(row);
  }
}

export function renderAll(session: Session, panels: Panels): void {
  renderBanner(session, panels.banner);
  renderStatus(session, panels.status);
  renderStrip(session, panels.strip);
  renderPosition(session, panels.position);
  renderSignals(session.latestStep, panels.signals);
  renderRules(session, panels.rules);
  renderParams(session, panels.params);
  renderCommandLog(session, panels.commandLog);
}
