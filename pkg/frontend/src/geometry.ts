// World <-> canvas transforms. Continuous world coordinates are [x, y]
// with x along columns and y along rows (downward), so cell (r, c) spans
// [c, c+1] x [r, r+1]; the canvas uses the same orientation.

import type { Vec2 } from "./types.js";

export const CELL_PX = 48;

export function worldToPx(p: Vec2): Vec2 {
  return [p[0] * CELL_PX, p[1] * CELL_PX];
}

export function pxToWorld(p: Vec2): Vec2 {
  return [p[0] / CELL_PX, p[1] / CELL_PX];
}

/** Pixel center of a grid cell given as [row, col]. */
export function cellCenterPx(cell: [number, number]): Vec2 {
  const [r, c] = cell;
  return [(c + 0.5) * CELL_PX, (r + 0.5) * CELL_PX];
}

export function canvasSize(width: number, height: number): Vec2 {
  return [width * CELL_PX, height * CELL_PX];
}
