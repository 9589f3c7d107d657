/** Frontier exploration: scatter/parallel-coordinate scaling and brushing. */

import type { RecordPayload } from "./types.js";

export const OBJECTIVES = ["one_minus_au", "d_total", "jh_pen"] as const;
export const METRICS = ["one_minus_au", "d_b", "d_lu", "d_cs", "d_total",
                        "jh_pen"] as const;

export type ObjectiveKey = (typeof OBJECTIVES)[number];
export type MetricKey = (typeof METRICS)[number];

export interface Brush {
  key: MetricKey;
  min: number;
  max: number;
}

/**
 * Record ids passing every brush. All linked views (scatter, parallel
 * coordinates, records table) must render exactly this id set.
 */
export function applyBrushes(records: RecordPayload[],
                             brushes: Brush[]): Set<number> {
  const keep = new Set<number>();
  for (const record of records) {
    if (!record.valid) continue;
    const pass = brushes.every((b) => {
      const v = record.norm[b.key];
      return v >= b.min && v <= b.max;
    });
    if (pass) keep.add(record.id);
  }
  return keep;
}

export interface ScatterPoint {
  id: number;
  x: number;
  y: number;
  onFront: boolean;
  isKnee: boolean;
}

/** Normalized objectives are already on [0, 1]; axes stay fixed there. */
export function scatterPoints(records: RecordPayload[], xKey: ObjectiveKey,
                              yKey: ObjectiveKey, frontIds: Set<number>,
                              kneeId: number | null): ScatterPoint[] {
  return records.filter((r) => r.valid).map((r) => ({
    id: r.id,
    x: r.norm[xKey],
    y: r.norm[yKey],
    onFront: frontIds.has(r.id),
    isKnee: r.id === kneeId,
  }));
}

export interface ParallelLine {
  id: number;
  /** One [0,1] vertical position per metric axis, in METRICS order. */
  values: number[];
}

export function parallelLines(records: RecordPayload[]): ParallelLine[] {
  return records.filter((r) => r.valid).map((r) => ({
    id: r.id,
    values: METRICS.map((m) => r.norm[m]),
  }));
}

/** The knee must always be a frontier member; null when the front is empty. */
export function checkKnee(frontIds: Set<number>,
                          kneeId: number | null): boolean {
  if (kneeId === null) return frontIds.size === 0;
  return frontIds.has(kneeId);
}

export interface TableRow {
  id: number;
  onFront: boolean;
  cells: Record<MetricKey, number>;
}

export function tableRows(records: RecordPayload[], visible: Set<number>,
                          frontIds: Set<number>): TableRow[] {
  return records
    .filter((r) => r.valid && visible.has(r.id))
    .map((r) => ({
      id: r.id,
      onFront: frontIds.has(r.id),
      cells: Object.fromEntries(
        METRICS.map((m) => [m, r.norm[m]])) as Record<MetricKey, number>,
    }));
}
