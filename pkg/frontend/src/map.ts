/** Choropleth geometry helpers and the what-if diff of two evaluations. */

import type { BlockFeature, FeatureCollection } from "./types.js";

export const USE_COLORS: Record<string, string> = {
  R: "#f4d06f", A: "#9b5de5", G: "#7cb518", B: "#e63946",
  I: "#6c757d", T: "#4cc9f0", E: "#3a86ff", F: "#ff8fab",
};

export interface Bounds {
  minX: number;
  minY: number;
  maxX: number;
  maxY: number;
}

export function boundsOf(collection: FeatureCollection): Bounds {
  let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity;
  for (const feature of collection.features) {
    for (const ring of feature.geometry.coordinates) {
      for (const [x, y] of ring) {
        minX = Math.min(minX, x);
        minY = Math.min(minY, y);
        maxX = Math.max(maxX, x);
        maxY = Math.max(maxY, y);
      }
    }
  }
  return { minX, minY, maxX, maxY };
}

/** SVG path for a polygon, with y flipped so north stays up. */
export function polygonPath(feature: BlockFeature, bounds: Bounds): string {
  const parts: string[] = [];
  for (const ring of feature.geometry.coordinates) {
    ring.forEach(([x, y], i) => {
      const px = x - bounds.minX;
      const py = bounds.maxY - y;
      parts.push(`${i === 0 ? "M" : "L"}${px},${py}`);
    });
    parts.push("Z");
  }
  return parts.join(" ");
}

/** Linear light-to-dark ramp for FAR shading. */
export function farColor(far: number, maxFar: number): string {
  const t = maxFar > 0 ? Math.max(0, Math.min(1, far / maxFar)) : 0;
  const level = Math.round(235 - t * 180);
  return `rgb(${level},${level},235)`;
}

export interface BlockShape {
  id: number;
  path: string;
  fill: string;
  title: string;
}

export function choropleth(collection: FeatureCollection,
                           mode: "use" | "far"): BlockShape[] {
  const bounds = boundsOf(collection);
  const maxFar = Math.max(0, ...collection.features.map(
    (f) => Number(f.properties.far ?? 0)));
  return collection.features.map((feature) => {
    const id = Number(feature.properties.id);
    const use = String(feature.properties.use ?? "");
    const far = Number(feature.properties.far ?? 0);
    const fill = mode === "use"
      ? USE_COLORS[use] ?? "#dddddd"
      : farColor(far, maxFar);
    const title = mode === "use"
      ? `block ${id}: ${use}`
      : `block ${id}: FAR ${far.toFixed(2)}`;
    return { id, path: polygonPath(feature, bounds), fill, title };
  });
}

export interface BlockChange {
  id: number;
  from: string;
  to: string;
}

/** Blocks whose dominant use changed between two evaluations. */
export function diffBlocks(prev: FeatureCollection,
                           next: FeatureCollection): BlockChange[] {
  const before = new Map<number, string>();
  for (const f of prev.features) {
    before.set(Number(f.properties.id), String(f.properties.use ?? ""));
  }
  const changes: BlockChange[] = [];
  for (const f of next.features) {
    const id = Number(f.properties.id);
    const to = String(f.properties.use ?? "");
    const from = before.get(id);
    if (from !== undefined && from !== to) changes.push({ id, from, to });
  }
  return changes.sort((a, b) => a.id - b.id);
}
