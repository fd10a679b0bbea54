import { describe, expect, it } from "vitest";

import { actionForDrag, actionForKeys, isMovementKey } from "../src/input.js";

describe("actionForKeys", () => {
  it("maps single arrows and WASD to unit actions", () => {
    expect(actionForKeys(["ArrowRight"])).toEqual([1, 0]);
    expect(actionForKeys(["KeyD"])).toEqual([1, 0]);
    expect(actionForKeys(["ArrowLeft"])).toEqual([-1, 0]);
    expect(actionForKeys(["ArrowUp"])).toEqual([0, -1]);
    expect(actionForKeys(["KeyS"])).toEqual([0, 1]);
  });

  it("combines two held keys into a diagonal", () => {
    expect(actionForKeys(["KeyW", "KeyD"])).toEqual([1, -1]);
  });

  it("clamps stacked same-direction keys to the unit box", () => {
    expect(actionForKeys(["KeyD", "ArrowRight"])).toEqual([1, 0]);
  });

  it("returns null when opposite keys cancel or nothing is held", () => {
    expect(actionForKeys(["KeyA", "KeyD"])).toBeNull();
    expect(actionForKeys([])).toBeNull();
  });

  it("ignores non-movement keys", () => {
    expect(actionForKeys(["Space", "KeyQ"])).toBeNull();
    expect(isMovementKey("Space")).toBe(false);
    expect(isMovementKey("KeyW")).toBe(true);
  });
});

describe("actionForDrag", () => {
  const cell = 48;

  it("is proportional to the drag distance", () => {
    expect(actionForDrag(24, 0, cell)).toEqual([0.5, 0]);
    expect(actionForDrag(0, -12, cell)).toEqual([0, -0.25]);
  });

  it("clamps each component to [-1, 1]", () => {
    expect(actionForDrag(200, -500, cell)).toEqual([1, -1]);
  });

  it("returns null inside the deadzone", () => {
    expect(actionForDrag(1, 0, cell)).toBeNull();
    expect(actionForDrag(0, 0, cell)).toBeNull();
  });
});
