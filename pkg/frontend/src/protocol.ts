/**
 * Engine channel protocol: message parsing, acknowledgments and the clock
 * handshake. Transport-agnostic — the browser speaks WebSocket, tests use
 * a raw TCP socket, both hand lines (one JSON text each) to this layer.
 */

import type { EngineCommand } from "./state.js";

export interface LineTransport {
  send(line: string): void;
  /** single consumer: the latest handler receives every incoming line */
  setLineHandler(handler: ((line: string) => void) | null): void;
  close(): void;
}

export type EngineMessage =
  | { type: "command"; cmd: EngineCommand }
  | { type: "echo_reply"; echo: number; t0Us: number; tEngineUs: number }
  | { type: "unknown"; raw: string };

export function parseEngineMessage(line: string): EngineMessage {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch {
    return { type: "unknown", raw: line };
  }
  if (typeof obj !== "object" || obj === null) return { type: "unknown", raw: line };
  const m = obj as Record<string, unknown>;
  if (typeof m.echo === "number" && typeof m.t_engine_us === "number") {
    return {
      type: "echo_reply",
      echo: m.echo,
      t0Us: typeof m.t0_us === "number" ? m.t0_us : 0,
      tEngineUs: m.t_engine_us,
    };
  }
  if (typeof m.seq === "number" && typeof m.kind === "string") {
    const kinds = ["NONE", "SHIFT", "ROTATE", "ZOOM"];
    if (!kinds.includes(m.kind)) return { type: "unknown", raw: line };
    return {
      type: "command",
      cmd: {
        seq: m.seq,
        kind: m.kind as EngineCommand["kind"],
        dx: typeof m.dx === "number" ? m.dx : 0,
        dy: typeof m.dy === "number" ? m.dy : 0,
        dzoom: typeof m.dzoom === "number" ? m.dzoom : 0,
        mode: kinds.includes(m.mode as string) ? (m.mode as EngineCommand["kind"]) : undefined,
      },
    };
  }
  return { type: "unknown", raw: line };
}

export function buildEcho(echo: number, t0Us: number): string {
  return JSON.stringify({ echo, t0_us: t0Us });
}

/** t_presented_us must already be in the engine clock domain. */
export function buildAck(cmdSeq: number, tPresentedUs: number): string {
  return JSON.stringify({ cmd_seq: cmdSeq, t_presented_us: tPresentedUs });
}

/** Buffers stream chunks and emits complete newline-terminated lines. */
export class LineSplitter {
  private buf = "";

  feed(chunk: string): string[] {
    this.buf += chunk;
    const parts = this.buf.split("\n");
    this.buf = parts.pop() ?? "";
    return parts.filter((p) => p.trim().length > 0);
  }
}

/**
 * Midpoint clock-offset estimate over an echo exchange: each round sends
 * our timestamp, the engine replies with its own, and the offset sample is
 * t_engine - (t_send + t_receive)/2. More rounds average away scheduling
 * noise. Returns engine-minus-local microseconds.
 */
export function estimateClockOffset(
  transport: LineTransport,
  nowUs: () => number,
  rounds = 10,
  timeoutMs = 2000,
): Promise<number> {
  return new Promise((resolve, reject) => {
    const samples: number[] = [];
    let round = 0;
    let t0 = 0;
    const timer = setTimeout(() => {
      transport.setLineHandler(null);
      reject(new Error("handshake timeout"));
    }, timeoutMs);

    const sendNext = () => {
      t0 = nowUs();
      transport.send(buildEcho(round, t0));
    };

    transport.setLineHandler((line) => {
      const msg = parseEngineMessage(line);
      if (msg.type !== "echo_reply" || msg.echo !== round) return;
      const t1 = nowUs();
      samples.push(msg.tEngineUs - (t0 + t1) / 2);
      round += 1;
      if (round >= rounds) {
        clearTimeout(timer);
        transport.setLineHandler(null);
        resolve(samples.reduce((a, b) => a + b, 0) / samples.length);
      } else {
        sendNext();
      }
    });
    sendNext();
  });
}
