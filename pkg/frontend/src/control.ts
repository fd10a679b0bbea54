// Control panel state: metric range sliders and the explicit style
// picker, plus the rollout request each configuration produces. An
// explicit style pick overrides the property range.

import type { ServerInfo } from "./types.js";

export interface PanelState {
  enabled: boolean;
  notice: string | null; // shown instead of controls when disabled
  metrics: string[];
  metric: string;
  min: number;
  max: number;
  styleIndex: number | null; // explicit pick; null means "use the range"
  nStyles: number | null;
  error: string | null; // inline "property unsatisfiable" slot
}

export function initPanel(info: ServerInfo, lengthMin: number,
                          lengthMax: number): PanelState {
  return {
    enabled: info.checkpoint,
    notice: info.checkpoint
      ? null
      : "no checkpoint loaded; start the server with --checkpoint to "
        + "enable conditioned rollouts",
    metrics: info.metrics,
    metric: info.metrics.includes("length") ? "length" : info.metrics[0],
    min: lengthMin,
    max: lengthMax,
    styleIndex: null,
    nStyles: info.n_styles,
    error: null,
  };
}

/** Body for POST /rollout under the current panel configuration. */
export function rolloutBody(p: PanelState):
    { style_index: number } | { property: { metric: string; min: number; max: number } } {
  if (p.styleIndex !== null) {
    return { style_index: p.styleIndex };
  }
  return { property: { metric: p.metric, min: p.min, max: p.max } };
}

/** Move one end of the range; the other end follows so min <= max.
 *  Any previous unsatisfiable error is stale once the range moves. */
export function setRange(p: PanelState, which: "min" | "max",
                         value: number): PanelState {
  let { min, max } = p;
  if (which === "min") {
    min = value;
    max = Math.max(max, value);
  } else {
    max = value;
    min = Math.min(min, value);
  }
  return { ...p, min, max, error: null, styleIndex: null };
}

export function setMetric(p: PanelState, metric: string): PanelState {
  return { ...p, metric, error: null, styleIndex: null };
}

export function pickStyle(p: PanelState, index: number | null): PanelState {
  if (index !== null && p.nStyles !== null
      && (index < 0 || index >= p.nStyles)) {
    return { ...p, error: `style index out of range [0, ${p.nStyles})` };
  }
  return { ...p, styleIndex: index, error: null };
}

export function setUnsatisfiable(p: PanelState, message: string): PanelState {
  return { ...p, error: message };
}
