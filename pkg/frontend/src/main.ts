/**
 * Console bootstrap. Configuration via query string: ?url=ws://host/ws
 * (defaults to the serving host) and ?pace=N (sent once on connect click,
 * which counts as the user's action).
 */

import { ConsoleClient } from "./client.js";
import { Panels, renderAll } from "./ui.js";

function defaultUrl(): string {
  const params = new URLSearchParams(window.location.search);
  const fromQuery = params.get("url");
  if (fromQuery) return fromQuery;
  const scheme = window.location.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${window.location.host}/ws`;
}

function panel(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function main(): void {
  const panels: Panels = {
    banner: panel("banner"),
    status: panel("status"),
    strip: panel("strip") as HTMLCanvasElement,
    position: panel("position"),
    signals: panel("signals"),
    rules: panel("rules"),
    params: panel("params"),
    commandLog: panel("command-log"),
  };

  const client = new ConsoleClient(defaultUrl());
  client.onChange((session) => renderAll(session, panels));

  const input = panel("command-input") as HTMLInputElement;
  const sendText = () => {
    const text = input.value.trim();
    if (!text || client.session.status !== "connected") return;
    client.session.sendCommand(text);
    input.value = "";
  };
  panel("send").addEventListener("click", sendText);
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") sendText();
  });

  const quick: Array<[string, string]> = [
    ["btn-stop", "stop"],
    ["btn-launch", "launch"],
    ["btn-left", "change_lane(left)"],
    ["btn-right", "change_lane(right)"],
    ["btn-slow", "max_speed(30)"],
  ];
  for (const [id, text] of quick) {
    panel(id).addEventListener("click", () => {
      if (client.session.status === "connected") client.session.sendCommand(text);
    });
  }

  panel("btn-pause").addEventListener("click", () => client.session.pause());
  panel("btn-resume").addEventListener("click", () => client.session.resume());
  panel("btn-retry").addEventListener("click", () => client.retry());
  const paceInput = panel("pace-input") as HTMLInputElement;
  panel("btn-pace").addEventListener("click", () => {
    const factor = Number(paceInput.value);
    if (factor > 0) client.session.setPace(factor);
  });

  const requestedPace = new URLSearchParams(window.location.search).get("pace");
  if (requestedPace) paceInput.value = requestedPace;

  client.connect();
}

window.addEventListener("DOMContentLoaded", main);
