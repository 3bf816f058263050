// Mask overlay compositing, kept free of DOM types so it runs in tests.

import { MASK_SIDE } from "./protocol.js";

export interface CropRect {
  x: number;
  y: number;
  size: number;
}

/** The window of the sent frame that the model actually sees: the
 * centered 224x224 crop, or (for frames with a short side under 224,
 * which the service upscales before cropping) the centered square over
 * the full short side. */
export function cropRect(width: number, height: number): CropRect {
  const side = Math.min(width, height) < MASK_SIDE
    ? Math.min(width, height)
    : MASK_SIDE;
  return {
    x: Math.floor((width - side) / 2),
    y: Math.floor((height - side) / 2),
    size: side,
  };
}

export interface RgbaBuffer {
  data: Uint8ClampedArray;
  width: number;
  height: number;
}

const TINT = { r: 255, g: 48, b: 64 };

/** Tint mask-positive pixels inside the crop rectangle of an RGBA frame.
 * Pixels outside the rectangle are never touched. */
export function tintMask(
  frame: RgbaBuffer,
  mask: Uint8Array,
  rect: CropRect,
  opacity: number,
): number {
  let tinted = 0;
  for (let my = 0; my < MASK_SIDE; my++) {
    const fy = rect.y + Math.floor((my * rect.size) / MASK_SIDE);
    if (fy < 0 || fy >= frame.height) continue;
    for (let mx = 0; mx < MASK_SIDE; mx++) {
      if (mask[my * MASK_SIDE + mx] === 0) continue;
      const fx = rect.x + Math.floor((mx * rect.size) / MASK_SIDE);
      if (fx < 0 || fx >= frame.width) continue;
      const i = (fy * frame.width + fx) * 4;
      frame.data[i] = frame.data[i] * (1 - opacity) + TINT.r * opacity;
      frame.data[i + 1] = frame.data[i + 1] * (1 - opacity) + TINT.g * opacity;
      frame.data[i + 2] = frame.data[i + 2] * (1 - opacity) + TINT.b * opacity;
      tinted += 1;
    }
  }
  return tinted;
}
