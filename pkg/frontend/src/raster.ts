/** Pure stroke rasterizer.
 *
 * The exported image is rebuilt from the stroke list alone — never read
 * back from the display canvas — so the template guide can't leak into
 * the export and the bytes are identical for identical strokes on every
 * platform.
 */

import { CANVAS_SIZE, Stroke } from "./model.js";

export const STROKE_WIDTH = 3;
export const INK = 0;
export const PAPER = 255;

const RADIUS = STROKE_WIDTH / 2;
/** Sub-pixel sampling step along a segment, in pixels. */
const STEP = 0.25;

/** Paint a filled disc; pixels are hit by their centers. */
function stampDisc(buf: Uint8Array, cx: number, cy: number): void {
  const x0 = Math.max(0, Math.floor(cx - RADIUS));
  const x1 = Math.min(CANVAS_SIZE - 1, Math.ceil(cx + RADIUS));
  const y0 = Math.max(0, Math.floor(cy - RADIUS));
  const y1 = Math.min(CANVAS_SIZE - 1, Math.ceil(cy + RADIUS));
  const r2 = RADIUS * RADIUS;
  for (let py = y0; py <= y1; py++) {
    const dy = py + 0.5 - cy;
    for (let px = x0; px <= x1; px++) {
      const dx = px + 0.5 - cx;
      if (dx * dx + dy * dy <= r2) {
        buf[py * CANVAS_SIZE + px] = INK;
      }
    }
  }
}

function stampSegment(
  buf: Uint8Array,
  ax: number,
  ay: number,
  bx: number,
  by: number,
): void {
  const len = Math.hypot(bx - ax, by - ay);
  const steps = Math.max(1, Math.ceil(len / STEP));
  for (let i = 0; i <= steps; i++) {
    const f = i / steps;
    stampDisc(buf, ax + (bx - ax) * f, ay + (by - ay) * f);
  }
}

/** Render strokes as an 8-bit grayscale raster, white paper, black ink. */
export function rasterize(strokes: Stroke[]): Uint8Array {
  const buf = new Uint8Array(CANVAS_SIZE * CANVAS_SIZE).fill(PAPER);
  for (const stroke of strokes) {
    if (stroke.length === 0) continue;
    if (stroke.length === 1) {
      stampDisc(buf, stroke[0].x, stroke[0].y);
      continue;
    }
    for (let i = 1; i < stroke.length; i++) {
      stampSegment(
        buf,
        stroke[i - 1].x,
        stroke[i - 1].y,
        stroke[i].x,
        stroke[i].y,
      );
    }
  }
  return buf;
}
