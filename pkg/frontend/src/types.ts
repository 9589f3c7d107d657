/** Shared request/response shapes of the planning service API. */

export interface PolicyBody {
  radii?: number[];
  sigmas?: number[];
  rhos?: number[];
  shares?: Record<string, number>;
  gamma?: Record<string, number>;
  priority?: string[];
  b_total?: number;
}

export interface BlockFeature {
  type: "Feature";
  geometry: { type: "Polygon"; coordinates: number[][][] };
  properties: Record<string, number | string>;
}

export interface FeatureCollection {
  type: "FeatureCollection";
  features: BlockFeature[];
}

export interface SiteResponse {
  blocks: FeatureCollection;
  tier_names: string[];
  radii: number[];
}

export interface RawMetrics {
  au: number;
  one_minus_au: number;
  d_b: number;
  d_lu: number;
  d_cs: number;
  jh_pen: number;
}

export interface NormMetrics {
  one_minus_au: number;
  d_b: number;
  d_lu: number;
  d_cs: number;
  d_total: number;
  jh_pen: number;
}

export interface PolicyEcho extends Record<string, unknown> {
  priority: string[];
  b_total: number;
  shares: Record<string, number>;
  gamma: Record<string, number>;
}

export interface RecordPayload {
  id: number;
  valid: boolean;
  error: string | null;
  raw: RawMetrics;
  norm: NormMetrics;
  policy: PolicyEcho;
}

export interface EvaluateResponse {
  record: { valid: boolean; raw: RawMetrics; policy: PolicyEcho };
  allocation: FeatureCollection;
  shares: Record<string, number>;
}

export interface ParetoResponse {
  front: RecordPayload[];
  knee_id: number | null;
}

export interface SensitivityGroup extends Record<string, number> {
  value: number;
  count: number;
}

export interface SensitivityResponse {
  param: string;
  groups: SensitivityGroup[];
}
