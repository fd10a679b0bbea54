// Canvas drawing at a fixed cell-pixel scale. Everything drawn here is
// a server-sent value: maze payload, live session position, rollout
// trajectory states.

import { CELL_PX, cellCenterPx, worldToPx } from "./geometry.js";
import type { MazePayload, Vec2 } from "./types.js";

export interface Scene {
  maze: MazePayload;
  agent: Vec2 | null;
  visited: number[];
  done: boolean;
  ghostTrail: Vec2[]; // rollout animation, world coords
  ghost: Vec2 | null;
}

const COLORS = {
  wall: "#3b4252",
  floor: "#14161c",
  grid: "#1d2130",
  goal: "#3ea56f",
  door: "#7f9ddb",
  doorVisited: "#e8c45a",
  start: "#5d6578",
  agent: "#e86a5f",
  ghost: "#9b7fd4",
  trail: "rgba(155, 127, 212, 0.55)",
};

export function drawScene(ctx: CanvasRenderingContext2D, sc: Scene): void {
  const { maze } = sc;
  const rows = maze.text.split("\n");
  ctx.fillStyle = COLORS.floor;
  ctx.fillRect(0, 0, maze.width * CELL_PX, maze.height * CELL_PX);

  for (let r = 0; r < rows.length; r++) {
    for (let c = 0; c < rows[r].length; c++) {
      if (rows[r][c] === "#") {
        ctx.fillStyle = COLORS.wall;
        ctx.fillRect(c * CELL_PX, r * CELL_PX, CELL_PX, CELL_PX);
      }
    }
  }

  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  for (let c = 0; c <= maze.width; c++) {
    ctx.beginPath();
    ctx.moveTo(c * CELL_PX, 0);
    ctx.lineTo(c * CELL_PX, maze.height * CELL_PX);
    ctx.stroke();
  }
  for (let r = 0; r <= maze.height; r++) {
    ctx.beginPath();
    ctx.moveTo(0, r * CELL_PX);
    ctx.lineTo(maze.width * CELL_PX, r * CELL_PX);
    ctx.stroke();
  }

  const goal = cellCenterPx(maze.goal);
  disc(ctx, goal, 0.5 * CELL_PX, COLORS.goal, 0.35);
  label(ctx, goal, "G", COLORS.goal);

  const start = cellCenterPx(maze.start);
  label(ctx, start, "S", COLORS.start);

  for (const [idx, cell] of Object.entries(maze.doors)) {
    const p = cellCenterPx(cell);
    const hit = sc.visited.includes(Number(idx));
    const color = hit ? COLORS.doorVisited : COLORS.door;
    disc(ctx, p, 0.5 * CELL_PX, color, hit ? 0.3 : 0.15);
    label(ctx, p, idx, color);
  }

  if (sc.ghostTrail.length > 1) {
    ctx.strokeStyle = COLORS.trail;
    ctx.lineWidth = 2;
    ctx.beginPath();
    const [x0, y0] = worldToPx(sc.ghostTrail[0]);
    ctx.moveTo(x0, y0);
    for (const p of sc.ghostTrail.slice(1)) {
      const [x, y] = worldToPx(p);
      ctx.lineTo(x, y);
    }
    ctx.stroke();
  }
  if (sc.ghost) {
    disc(ctx, worldToPx(sc.ghost), 0.16 * CELL_PX, COLORS.ghost, 1);
  }

  if (sc.agent) {
    disc(ctx, worldToPx(sc.agent), 0.18 * CELL_PX, COLORS.agent, 1);
    if (sc.done) {
      const p = worldToPx(sc.agent);
      ctx.strokeStyle = COLORS.agent;
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.arc(p[0], p[1], 0.3 * CELL_PX, 0, 2 * Math.PI);
      ctx.stroke();
    }
  }
}

function disc(ctx: CanvasRenderingContext2D, p: Vec2, r: number,
              color: string, alpha: number): void {
  ctx.save();
  ctx.globalAlpha = alpha;
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(p[0], p[1], r, 0, 2 * Math.PI);
  ctx.fill();
  ctx.restore();
}

function label(ctx: CanvasRenderingContext2D, p: Vec2, text: string,
               color: string): void {
  ctx.fillStyle = color;
  ctx.font = `bold ${Math.round(CELL_PX * 0.38)}px system-ui, sans-serif`;
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  ctx.fillText(text, p[0], p[1]);
}
