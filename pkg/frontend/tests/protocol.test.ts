import { describe, expect, it } from "vitest";

import {
  buildAck,
  buildEcho,
  estimateClockOffset,
  LineSplitter,
  parseEngineMessage,
  type LineTransport,
} from "../src/protocol.js";

describe("message parsing", () => {
  it("parses broadcast commands", () => {
    const msg = parseEngineMessage(
      '{"seq":41,"kind":"SHIFT","dx":0.0068,"dy":0.0,"dzoom":0.0,"mode":"SHIFT"}',
    );
    expect(msg.type).toBe("command");
    if (msg.type === "command") {
      expect(msg.cmd.seq).toBe(41);
      expect(msg.cmd.kind).toBe("SHIFT");
      expect(msg.cmd.dx).toBeCloseTo(0.0068, 10);
      expect(msg.cmd.mode).toBe("SHIFT");
    }
  });

  it("parses echo replies", () => {
    const msg = parseEngineMessage('{"echo":3,"t0_us":100,"t_engine_us":2000}');
    expect(msg).toEqual({ type: "echo_reply", echo: 3, t0Us: 100, tEngineUs: 2000 });
  });

  it("flags malformed lines instead of throwing", () => {
    for (const raw of ["nonsense", "[1,2]", '{"seq":1,"kind":"WARP"}', '{"x":1}']) {
      expect(parseEngineMessage(raw).type).toBe("unknown");
    }
  });

  it("builds acks and echoes with the wire field names", () => {
    expect(JSON.parse(buildAck(7, 123456))).toEqual({ cmd_seq: 7, t_presented_us: 123456 });
    expect(JSON.parse(buildEcho(2, 99))).toEqual({ echo: 2, t0_us: 99 });
  });
});

describe("line splitting", () => {
  it("reassembles lines across chunk boundaries", () => {
    const splitter = new LineSplitter();
    expect(splitter.feed('{"a":')).toEqual([]);
    expect(splitter.feed('1}\n{"b":2}\n{"c"')).toEqual(['{"a":1}', '{"b":2}']);
    expect(splitter.feed(":3}\n")).toEqual(['{"c":3}']);
  });
});

class FakeEngineTransport implements LineTransport {
  private handler: ((line: string) => void) | null = null;

  constructor(private offsetUs: number, private nowUs: () => number) {}

  send(line: string): void {
    const msg = JSON.parse(line);
    const reply = JSON.stringify({
      echo: msg.echo,
      t0_us: msg.t0_us,
      t_engine_us: this.nowUs() + this.offsetUs,
    });
    queueMicrotask(() => this.handler?.(reply));
  }

  setLineHandler(handler: ((line: string) => void) | null): void {
    this.handler = handler;
  }

  close(): void {}
}

describe("clock handshake", () => {
  const nowUs = () => Number(process.hrtime.bigint() / 1000n);

  it("recovers a known offset over ten rounds", async () => {
    const transport = new FakeEngineTransport(123456, nowUs);
    const offset = await estimateClockOffset(transport, nowUs);
    expect(Math.abs(offset - 123456)).toBeLessThan(3000);
  });

  it("rejects on timeout when nothing answers", async () => {
    const silent: LineTransport = {
      send() {},
      setLineHandler() {},
      close() {},
    };
    await expect(estimateClockOffset(silent, nowUs, 3, 100)).rejects.toThrow(/timeout/);
  });
});
