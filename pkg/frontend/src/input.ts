// Keyboard and pointer mapping to env actions. Pure functions so the
// mapping itself is unit-testable without a DOM.

import type { Vec2 } from "./types.js";

// key code -> unit direction; y grows downward like canvas pixels
const KEY_VECTORS: Record<string, Vec2> = {
  ArrowUp: [0, -1],
  KeyW: [0, -1],
  ArrowDown: [0, 1],
  KeyS: [0, 1],
  ArrowLeft: [-1, 0],
  KeyA: [-1, 0],
  ArrowRight: [1, 0],
  KeyD: [1, 0],
};

export function isMovementKey(code: string): boolean {
  return code in KEY_VECTORS;
}

function clampUnit(v: number): number {
  return Math.max(-1, Math.min(1, v));
}

/** Sum of held movement keys, per-component clamped to [-1, 1].
 *  Returns null when no net movement (nothing held, or opposite keys). */
export function actionForKeys(held: Iterable<string>): Vec2 | null {
  let x = 0;
  let y = 0;
  for (const code of held) {
    const v = KEY_VECTORS[code];
    if (v) {
      x += v[0];
      y += v[1];
    }
  }
  x = clampUnit(x);
  y = clampUnit(y);
  if (x === 0 && y === 0) return null;
  return [x, y];
}

// drag of one full cell maps to a full-strength action
export const DRAG_FULL_SCALE = 1.0;
const DRAG_DEADZONE = 0.05;

/** Pointer drag (pixels since drag start) -> proportional action, each
 *  component clamped to [-1, 1]; null inside the deadzone. */
export function actionForDrag(dxPx: number, dyPx: number,
                              cellPx: number): Vec2 | null {
  const x = clampUnit(dxPx / (DRAG_FULL_SCALE * cellPx));
  const y = clampUnit(dyPx / (DRAG_FULL_SCALE * cellPx));
  if (Math.hypot(x, y) < DRAG_DEADZONE) return null;
  return [x, y];
}
