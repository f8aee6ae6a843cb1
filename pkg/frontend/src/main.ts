/**
 * Browser entry point: connect to the engine's viewer port over WebSocket,
 * queue incoming commands, drain them once per displayed frame, and send a
 * presentation acknowledgment per applied command so the engine can log
 * rendering latency. Works standalone (keyboard controls) when no engine
 * is reachable.
 */

import { parseObj, parseStl } from "./loaders.js";
import {
  buildAck,
  estimateClockOffset,
  parseEngineMessage,
  type LineTransport,
} from "./protocol.js";
import { createScene } from "./render.js";
import {
  applyCommand,
  initialState,
  type CommandKind,
  type EngineCommand,
  type ViewerState,
} from "./state.js";

const nowUs = (): number => Math.round(performance.now() * 1000);

class WsTransport implements LineTransport {
  private handler: ((line: string) => void) | null = null;

  constructor(private ws: WebSocket) {
    ws.onmessage = (ev) => {
      if (typeof ev.data === "string" && this.handler) this.handler(ev.data);
    };
  }

  send(line: string): void {
    if (this.ws.readyState === WebSocket.OPEN) this.ws.send(line);
  }

  setLineHandler(handler: ((line: string) => void) | null): void {
    this.handler = handler;
  }

  close(): void {
    this.ws.close();
  }
}

function hud(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function main(): void {
  const canvas = document.getElementById("scene") as HTMLCanvasElement;
  const scene = createScene(canvas);
  const modeEl = hud("mode");
  const connEl = hud("connection");
  const statsEl = hud("stats");

  let state: ViewerState = initialState();
  let pendingCommands: EngineCommand[] = [];
  let malformed = 0;
  let applied = 0;
  let transport: WsTransport | null = null;

  const setMode = (mode: CommandKind) => {
    modeEl.textContent = mode;
    modeEl.dataset.mode = mode;
  };
  setMode("NONE");

  const resize = () => {
    scene.resize(canvas.clientWidth || window.innerWidth, canvas.clientHeight || window.innerHeight);
  };
  window.addEventListener("resize", resize);
  resize();

  // render loop: drain the queue once per displayed frame, ack afterwards
  const tick = () => {
    const batch = pendingCommands;
    pendingCommands = [];
    let lastMode: CommandKind | null = null;
    const ackSeqs: number[] = [];
    for (const cmd of batch) {
      lastMode = cmd.mode ?? cmd.kind;
      if (cmd.kind !== "NONE") {
        state = applyCommand(state, cmd);
        ackSeqs.push(cmd.seq);
        applied += 1;
      }
    }
    if (lastMode !== null) setMode(lastMode);
    scene.renderFrame(state);
    if (transport && ackSeqs.length > 0) {
      const tPresented = nowUs() + state.clockOffsetUs;
      for (const seq of ackSeqs) transport.send(buildAck(seq, tPresented));
    }
    statsEl.textContent =
      `zoom ×${state.zoom.toFixed(3)}  applied ${applied}` +
      (malformed ? `  malformed ${malformed}` : "");
    requestAnimationFrame(tick);
  };
  requestAnimationFrame(tick);

  // engine connection on the page's own host/port (the engine serves us)
  const url = `ws://${location.host}/commands`;
  const ws = new WebSocket(url);
  ws.onopen = async () => {
    const t = new WsTransport(ws);
    transport = t;
    state = { ...state, connected: true };
    connEl.textContent = "connected";
    connEl.dataset.state = "ok";
    try {
      const offset = await estimateClockOffset(t, nowUs);
      state = { ...state, clockOffsetUs: Math.round(offset) };
      connEl.textContent = `connected (clock offset ${(offset / 1000).toFixed(1)} ms)`;
    } catch {
      connEl.textContent = "connected (no clock sync: render latency disabled)";
      transport = null; // keep viewing, stop acking
    }
    t.setLineHandler((line) => {
      const msg = parseEngineMessage(line);
      if (msg.type === "command") {
        pendingCommands.push(msg.cmd);
      } else if (msg.type === "unknown") {
        malformed += 1;
        console.warn("ignoring malformed engine message:", msg.raw);
      }
    });
  };
  ws.onclose = () => {
    transport = null;
    state = { ...state, connected: false };
    connEl.textContent = "disconnected — keyboard: arrows pan, WASD orbit, +/- zoom";
    connEl.dataset.state = "down";
  };

  // keyboard fallback so the viewer is usable without an engine
  window.addEventListener("keydown", (ev) => {
    const key = ev.key;
    const fake = (kind: CommandKind, dx = 0, dy = 0, dzoom = 0) =>
      pendingCommands.push({ seq: -1, kind, dx, dy, dzoom, mode: kind });
    if (key === "ArrowLeft") fake("SHIFT", -0.01);
    else if (key === "ArrowRight") fake("SHIFT", +0.01);
    else if (key === "ArrowUp") fake("SHIFT", 0, -0.01);
    else if (key === "ArrowDown") fake("SHIFT", 0, +0.01);
    else if (key === "a") fake("ROTATE", -0.02);
    else if (key === "d") fake("ROTATE", +0.02);
    else if (key === "w") fake("ROTATE", 0, -0.02);
    else if (key === "s") fake("ROTATE", 0, +0.02);
    else if (key === "+" || key === "=") fake("ZOOM", 0, 0, -0.01);
    else if (key === "-") fake("ZOOM", 0, 0, +0.01);
  });

  // user geometry: STL or OBJ from the file picker
  const picker = document.getElementById("mesh-file") as HTMLInputElement;
  picker.addEventListener("change", async () => {
    const file = picker.files?.[0];
    if (!file) return;
    try {
      if (file.name.toLowerCase().endsWith(".obj")) {
        scene.setMesh(parseObj(await file.text()));
      } else {
        scene.setMesh(parseStl(await file.arrayBuffer()));
      }
    } catch (err) {
      console.warn("could not load mesh:", err);
      statsEl.textContent = `mesh load failed: ${err}`;
    }
  });
}

main();
