// Live tests against the real segmentation service (spawned as a child
// process): slider round-trip with overlay monotonicity, replayed-frame
// throughput, and recovery from a service restart.

import { ChildProcess, spawn } from "node:child_process";
import { readFileSync } from "node:fs";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";
import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { putConfig, fetchModels } from "../src/api.js";
import { maskArea, MaskPacket } from "../src/protocol.js";
import { StreamSession, WsLike } from "../src/session.js";

const here = dirname(fileURLToPath(import.meta.url));
const PORT = 8397;
const BASE = `http://127.0.0.1:${PORT}`;
const frameJpeg = new Uint8Array(
  Buffer.from(
    readFileSync(join(here, "..", "fixtures", "frame_jpeg.b64"), "utf-8"),
    "base64",
  ),
);

const wsFactory = (url: string) => new WebSocket(url) as unknown as WsLike;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

function startService(): ChildProcess {
  const child = spawn(
    "python3", ["-m", "woundseg.cli", "serve", "--port", String(PORT)],
    { stdio: ["ignore", "ignore", "pipe"] },
  );
  child.stderr?.on("data", () => { /* uvicorn logs */ });
  return child;
}

async function waitReady(timeoutMs = 90_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/models`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await sleep(200);
  }
  throw new Error("service did not become ready");
}

let service: ChildProcess;

beforeAll(async () => {
  service = startService();
  await waitReady();
}, 120_000);

afterAll(() => {
  service?.kill("SIGKILL");
});

async function collectMask(session: StreamSession, masks: MaskPacket[],
                           timeoutMs = 20_000): Promise<MaskPacket> {
  const target = masks.length + 1;
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (session.offerFrame(frameJpeg)) {
      // one un-acked frame at a time; wait for its mask
      while (Date.now() < deadline) {
        if (masks.length >= target) return masks[masks.length - 1];
        await sleep(10);
      }
    }
    await sleep(20);
  }
  throw new Error("no mask received in time");
}

describe("threshold slider against the live service", () => {
  it("acknowledged config drives a non-increasing overlay on a fixed frame", async () => {
    const masks: MaskPacket[] = [];
    const session = new StreamSession({
      url: `ws://127.0.0.1:${PORT}/stream`,
      wsFactory,
      onMask: (m) => masks.push(m),
    });
    session.connect();
    try {
      const ackLow = await putConfig(BASE, { threshold: 0.5 });
      expect(ackLow.threshold).toBe(0.5);
      const models = await fetchModels(BASE);
      expect(models.threshold).toBe(0.5); // slider mirror source of truth
      const loose = await collectMask(session, masks);

      const ackHigh = await putConfig(BASE, { threshold: 0.9 });
      expect(ackHigh.threshold).toBe(0.9);
      const tight = await collectMask(session, masks);

      expect(maskArea(tight.mask)).toBeLessThanOrEqual(maskArea(loose.mask));

      await expect(putConfig(BASE, { threshold: 1.7 })).rejects.toThrow();
      const after = await fetchModels(BASE);
      expect(after.threshold).toBe(0.9); // rejected mutation changed nothing
      await putConfig(BASE, { threshold: 0.75 });
    } finally {
      session.close();
    }
  }, 120_000);
});

describe("replayed live session", () => {
  it("sustains at least 5 masks per second and bounds un-acked frames", async () => {
    const masks: MaskPacket[] = [];
    const session = new StreamSession({
      url: `ws://127.0.0.1:${PORT}/stream`,
      wsFactory,
      onMask: (m) => masks.push(m),
    });
    session.connect();
    try {
      // replay frames as fast as the ack gate allows
      const pump = setInterval(() => session.offerFrame(frameJpeg), 5);
      try {
        await collectWarmup(session, masks);
        const startCount = masks.length;
        const windowMs = 3000;
        await sleep(windowMs);
        const rate = ((masks.length - startCount) * 1000) / windowMs;
        expect(rate).toBeGreaterThanOrEqual(5);
        // ack gating: every sent frame was answered before the next send
        expect(session.state.framesSent - masks.length).toBeLessThanOrEqual(1);
      } finally {
        clearInterval(pump);
      }
    } finally {
      session.close();
    }
  }, 120_000);

  it("recovers from a service restart within two seconds", async () => {
    const masks: MaskPacket[] = [];
    const session = new StreamSession({
      url: `ws://127.0.0.1:${PORT}/stream`,
      wsFactory,
      reconnectDelayMs: 200,
      onMask: (m) => masks.push(m),
    });
    session.connect();
    const pump = setInterval(() => session.offerFrame(frameJpeg), 10);
    try {
      await collectWarmup(session, masks);
      const firstStreamId = session.state.streamId;

      service.kill("SIGKILL");
      const deadline = Date.now() + 10_000;
      while (session.state.streamStatus !== "disconnected") {
        if (Date.now() > deadline) throw new Error("no disconnect detected");
        await sleep(50);
      }

      service = startService();
      await waitReady();
      const readyAt = Date.now();
      const before = masks.length;
      while (masks.length === before) {
        if (Date.now() - readyAt > 2000) {
          throw new Error("no mask within 2s of service return");
        }
        await sleep(20);
      }
      expect(Date.now() - readyAt).toBeLessThanOrEqual(2000);
      expect(session.state.streamId).toBeGreaterThan(firstStreamId);
    } finally {
      clearInterval(pump);
      session.close();
    }
  }, 180_000);
});

async function collectWarmup(session: StreamSession, masks: MaskPacket[],
                             timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (masks.length === 0) {
    if (Date.now() > deadline) throw new Error("no warmup mask");
    await sleep(25);
  }
}
