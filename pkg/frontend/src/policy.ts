/** Policy form state: validation mirroring the service, export/import. */

import type { PolicyBody } from "./types.js";

export const USES = ["R", "A", "G", "B", "I", "T", "E", "F"] as const;

export interface PolicyForm {
  tierNames: string[];
  radii: number[];
  sigmas: number[];
  rhos: number[];
  shares: Record<string, number>;
  gamma: Record<string, number>;
  priority: string[];
  bTotal: number;
}

export const RADIUS_BOUNDS: Record<string, [number, number]> = {
  district: [1200, 1600],
  community_cluster: [600, 900],
  community: [200, 400],
};

export function defaultForm(tierNames: string[], radii: number[]): PolicyForm {
  const shares: Record<string, number> = {
    F: 0.058, B: 0.174, E: 0.047, G: 0.065,
    A: 0.059, R: 0.333, I: 0.19, T: 0.074,
  };
  const gamma: Record<string, number> = {
    A: 0.1, B: 0.25, G: 0, I: 0.05, T: 0.05, R: 0.35, E: 0.1, F: 0.1,
  };
  return {
    tierNames: [...tierNames],
    radii: [...radii],
    sigmas: tierNames.map(() => 0.5),
    rhos: tierNames.map(() => 1 / tierNames.length),
    shares,
    gamma,
    priority: ["B", "A", "E", "F", "G", "R", "I", "T"],
    bTotal: 6_000_000,
  };
}

/** Client-side validation mirroring the service's 400 responses. */
export function validateForm(form: PolicyForm): string[] {
  const errors: string[] = [];
  const n = form.tierNames.length;
  if (form.radii.length !== n) errors.push("radii must match the tier count");
  if (form.radii.some((r) => !(r > 0))) errors.push("radii must be positive");
  if (form.sigmas.length !== n || form.rhos.length !== n) {
    errors.push("sigmas/rhos must match the tier count");
  }
  if (form.sigmas.some((s) => s < 0 || s > 1)) {
    errors.push("sigmas must lie in [0, 1]");
  }
  const rhoSum = form.rhos.reduce((a, b) => a + b, 0);
  if (!(rhoSum > 0)) errors.push("rho weights must not all be zero");
  for (const [label, vec] of [["shares", form.shares], ["gamma", form.gamma]] as const) {
    const values = Object.values(vec);
    if (values.some((v) => v < 0)) errors.push(`${label} must be nonnegative`);
    if (!(values.reduce((a, b) => a + b, 0) > 0)) {
      errors.push(`${label} must not all be zero`);
    }
  }
  const sorted = [...form.priority].sort().join(",");
  if (sorted !== [...USES].sort().join(",")) {
    errors.push("priority must be a permutation of the use set");
  }
  if (!(form.bTotal > 0)) errors.push("construction total must be positive");
  return errors;
}

/** Rescale a share vector in place so it sums to 1 (when possible). */
export function renormalize(vec: Record<string, number>): Record<string, number> {
  const total = Object.values(vec).reduce((a, b) => a + b, 0);
  if (!(total > 0)) return { ...vec };
  const out: Record<string, number> = {};
  for (const key of Object.keys(vec)) out[key] = vec[key] / total;
  return out;
}

function sortedRecord(vec: Record<string, number>): Record<string, number> {
  const out: Record<string, number> = {};
  for (const key of Object.keys(vec).sort()) out[key] = vec[key];
  return out;
}

/** Request body for POST /evaluate. */
export function toRequestBody(form: PolicyForm): PolicyBody {
  return {
    radii: [...form.radii],
    sigmas: [...form.sigmas],
    rhos: [...form.rhos],
    shares: sortedRecord(form.shares),
    gamma: sortedRecord(form.gamma),
    priority: [...form.priority],
    b_total: form.bTotal,
  };
}

/**
 * Canonical JSON export of the form. Key order and formatting are fixed,
 * so export -> import -> export reproduces the identical byte sequence.
 */
export function exportPolicy(form: PolicyForm): string {
  const doc = {
    tier_names: form.tierNames,
    radii: form.radii,
    sigmas: form.sigmas,
    rhos: form.rhos,
    shares: sortedRecord(form.shares),
    gamma: sortedRecord(form.gamma),
    priority: form.priority,
    b_total: form.bTotal,
  };
  return JSON.stringify(doc, null, 2) + "\n";
}

export function importPolicy(text: string): PolicyForm {
  const doc = JSON.parse(text) as Record<string, unknown>;
  const want = ["tier_names", "radii", "sigmas", "rhos", "shares", "gamma",
                "priority", "b_total"];
  for (const key of want) {
    if (!(key in doc)) throw new Error(`policy file missing field ${key}`);
  }
  const form: PolicyForm = {
    tierNames: doc.tier_names as string[],
    radii: doc.radii as number[],
    sigmas: doc.sigmas as number[],
    rhos: doc.rhos as number[],
    shares: doc.shares as Record<string, number>,
    gamma: doc.gamma as Record<string, number>,
    priority: doc.priority as string[],
    bTotal: doc.b_total as number,
  };
  const errors = validateForm(form);
  if (errors.length) throw new Error(`invalid policy file: ${errors.join("; ")}`);
  return form;
}

/** Move one entry of the priority list up or down by one place. */
export function movePriority(priority: string[], use: string,
                             direction: -1 | 1): string[] {
  const index = priority.indexOf(use);
  const target = index + direction;
  if (index < 0 || target < 0 || target >= priority.length) {
    return [...priority];
  }
  const out = [...priority];
  [out[index], out[target]] = [out[target], out[index]];
  return out;
}
