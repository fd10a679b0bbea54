// Cumulative behavior counts for generated rollouts and their overlay
// against the training histogram. The training masses arrive already
// normalized from /dataset/summary; generated masses are normalized
// client-side by the running total, which is bookkeeping, not a metric.

export interface OverlayRow {
  label: string;
  train: number;
  gen: number;
}

export interface Overlay {
  rows: OverlayRow[];
  total: number; // rollouts accumulated so far
}

export type Counts = Map<string, number>;

export function emptyCounts(): Counts {
  return new Map();
}

export function addRollout(counts: Counts, behavior: string): void {
  counts.set(behavior, (counts.get(behavior) ?? 0) + 1);
}

export function buildOverlay(train: Record<string, number>,
                             counts: Counts): Overlay {
  const labels = new Set<string>(Object.keys(train));
  let total = 0;
  for (const [label, n] of counts) {
    labels.add(label);
    total += n;
  }
  const rows = [...labels].sort().map((label) => ({
    label,
    train: train[label] ?? 0,
    gen: total === 0 ? 0 : (counts.get(label) ?? 0) / total,
  }));
  return { rows, total };
}
