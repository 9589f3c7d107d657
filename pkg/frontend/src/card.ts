/**
 * Objective card: the numbers shown for one evaluation.
 *
 * Values are taken verbatim from the service response; the client never
 * recomputes an objective.
 */

import type { NormMetrics, RawMetrics } from "./types.js";

export interface CardEntry {
  key: string;
  label: string;
  raw: number;
  norm: number | null;
}

const LABELS: Record<string, string> = {
  au: "Accessibility utility",
  one_minus_au: "1 - AU",
  d_b: "Construction total deviation",
  d_lu: "Land-use share deviation",
  d_cs: "Construction share deviation",
  jh_pen: "Jobs-housing penalty",
  d_total: "Aggregate deviation",
};

export function objectiveCard(raw: RawMetrics,
                              norm?: NormMetrics | null): CardEntry[] {
  const entries: CardEntry[] = [];
  for (const key of Object.keys(LABELS)) {
    const rawValue = (raw as unknown as Record<string, number>)[key];
    if (rawValue === undefined && key !== "d_total") continue;
    const normValue = norm
      ? (norm as unknown as Record<string, number>)[key] ?? null
      : null;
    if (rawValue === undefined && normValue === null) continue;
    entries.push({
      key,
      label: LABELS[key],
      raw: rawValue ?? NaN,
      norm: normValue,
    });
  }
  return entries;
}

/** Fixed-precision display string; the underlying datum stays exact. */
export function formatValue(value: number): string {
  if (Number.isNaN(value)) return "-";
  if (value !== 0 && (Math.abs(value) < 1e-3 || Math.abs(value) >= 1e6)) {
    return value.toExponential(3);
  }
  return value.toFixed(4);
}
