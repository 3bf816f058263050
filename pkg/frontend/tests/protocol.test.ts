import { readFileSync } from "node:fs";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import {
  decodeMaskPacket, decodeRle, encodeFramePacket, maskArea, MASK_PIXELS,
} from "../src/protocol.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixtures = JSON.parse(
  readFileSync(join(here, "..", "fixtures", "rle_cases.json"), "utf-8"),
) as {
  side: number;
  cases: { rects: number[][]; rle_b64: string; area: number }[];
};

function buildMask(rects: number[][], side: number): Uint8Array {
  const mask = new Uint8Array(side * side);
  for (const [x, y, w, h] of rects) {
    for (let row = y; row < y + h; row++) {
      mask.fill(1, row * side + x, row * side + x + w);
    }
  }
  return mask;
}

function runsFromBase64(b64: string): Uint16Array {
  const raw = Buffer.from(b64, "base64");
  const runs = new Uint16Array(raw.byteLength / 2);
  for (let i = 0; i < runs.length; i++) runs[i] = raw.readUInt16LE(2 * i);
  return runs;
}

describe("RLE decoding against the service encoder", () => {
  it("inverts the encoder on every fixture mask", () => {
    expect(fixtures.cases.length).toBe(100);
    for (const testCase of fixtures.cases) {
      const expected = buildMask(testCase.rects, fixtures.side);
      const runs = runsFromBase64(testCase.rle_b64);
      let total = 0;
      for (const r of runs) total += r;
      expect(total).toBe(MASK_PIXELS);
      const decoded = decodeRle(runs, MASK_PIXELS);
      expect(decoded).toEqual(expected);
      expect(maskArea(decoded)).toBe(testCase.area);
    }
  });

  it("decodes the single-run empty mask", () => {
    const mask = decodeRle(new Uint16Array([50176]), MASK_PIXELS);
    expect(maskArea(mask)).toBe(0);
  });

  it("rejects runs that do not cover the mask", () => {
    expect(() => decodeRle(new Uint16Array([10]), MASK_PIXELS)).toThrow(/50176/);
  });
});

describe("packet framing", () => {
  it("lays out the frame packet header little-endian", () => {
    const image = new Uint8Array([9, 8, 7]);
    const packet = encodeFramePacket(513, 2, image);
    expect(packet.byteLength).toBe(19);
    const view = new DataView(packet.buffer);
    expect(Number(view.getBigUint64(0, true))).toBe(513);
    expect(Number(view.getBigUint64(8, true))).toBe(2);
    expect([...packet.slice(16)]).toEqual([9, 8, 7]);
  });

  it("decodes a mask packet round trip", () => {
    const runs = new Uint16Array([100, 50, MASK_PIXELS - 150]);
    const body = new Uint8Array(12 + runs.length * 2);
    const view = new DataView(body.buffer);
    view.setBigUint64(0, 42n, true);
    view.setFloat32(8, 12.5, true);
    runs.forEach((r, i) => view.setUint16(12 + 2 * i, r, true));
    const packet = decodeMaskPacket(body.buffer);
    expect(packet.sequence).toBe(42);
    expect(packet.inferenceMs).toBeCloseTo(12.5);
    expect(maskArea(packet.mask)).toBe(50);
    expect(packet.mask[100]).toBe(1);
    expect(packet.mask[99]).toBe(0);
  });

  it("rejects malformed packets", () => {
    expect(() => decodeMaskPacket(new ArrayBuffer(5))).toThrow(/malformed/);
    expect(() => decodeMaskPacket(new ArrayBuffer(13))).toThrow(/malformed/);
  });
});
