// Binary stream protocol shared with the segmentation service.
//
// Frame packet (client -> server): 8-byte LE sequence, 8-byte LE timestamp
// in milliseconds, then an encoded image (JPEG/PNG bytes).
// Mask packet (server -> client): 8-byte LE sequence, 4-byte LE float32
// inference milliseconds, then 16-bit LE run lengths alternating 0/1
// pixels, starting with a 0-run.

export const MASK_SIDE = 224;
export const MASK_PIXELS = MASK_SIDE * MASK_SIDE;

export interface MaskPacket {
  sequence: number;
  inferenceMs: number;
  mask: Uint8Array; // MASK_PIXELS entries of 0|1, row-major
}

export function encodeFramePacket(
  sequence: number,
  timestampMs: number,
  image: Uint8Array,
): Uint8Array {
  const out = new Uint8Array(16 + image.byteLength);
  const view = new DataView(out.buffer);
  view.setBigUint64(0, BigInt(sequence), true);
  view.setBigUint64(8, BigInt(Math.max(0, Math.round(timestampMs))), true);
  out.set(image, 16);
  return out;
}

export function decodeRle(runs: Uint16Array, expectedPixels: number): Uint8Array {
  let total = 0;
  for (const run of runs) total += run;
  if (total !== expectedPixels) {
    throw new Error(`RLE runs sum to ${total}, expected ${expectedPixels}`);
  }
  const mask = new Uint8Array(expectedPixels);
  let pos = 0;
  let value = 0;
  for (const run of runs) {
    if (value === 1) mask.fill(1, pos, pos + run);
    pos += run;
    value ^= 1;
  }
  return mask;
}

export function decodeMaskPacket(data: ArrayBuffer): MaskPacket {
  if (data.byteLength < 12 || (data.byteLength - 12) % 2 !== 0) {
    throw new Error(`malformed mask packet of ${data.byteLength} bytes`);
  }
  const view = new DataView(data);
  const sequence = Number(view.getBigUint64(0, true));
  const inferenceMs = view.getFloat32(8, true);
  const runCount = (data.byteLength - 12) / 2;
  const runs = new Uint16Array(runCount);
  for (let i = 0; i < runCount; i++) {
    runs[i] = view.getUint16(12 + 2 * i, true);
  }
  return { sequence, inferenceMs, mask: decodeRle(runs, MASK_PIXELS) };
}

export function maskArea(mask: Uint8Array): number {
  let area = 0;
  for (const v of mask) area += v;
  return area;
}
