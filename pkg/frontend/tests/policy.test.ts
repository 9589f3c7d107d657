import { describe, expect, it } from "vitest";
import { defaultForm, exportPolicy, importPolicy, movePriority, renormalize,
         toRequestBody, validateForm } from "../src/policy.js";

const TIERS = ["district", "community_cluster", "community"];
const RADII = [1200, 900, 350];

describe("defaultForm", () => {
  it("starts valid", () => {
    expect(validateForm(defaultForm(TIERS, RADII))).toEqual([]);
  });

  it("shares sum to one", () => {
    const form = defaultForm(TIERS, RADII);
    const total = Object.values(form.shares).reduce((a, b) => a + b, 0);
    expect(total).toBeCloseTo(1, 9);
  });
});

describe("validateForm", () => {
  it("rejects a negative share", () => {
    const form = defaultForm(TIERS, RADII);
    form.shares.R = -0.1;
    expect(validateForm(form).join(" ")).toContain("shares");
  });

  it("rejects an all-zero gamma vector", () => {
    const form = defaultForm(TIERS, RADII);
    for (const key of Object.keys(form.gamma)) form.gamma[key] = 0;
    expect(validateForm(form).join(" ")).toContain("gamma");
  });

  it("rejects a sigma outside [0, 1]", () => {
    const form = defaultForm(TIERS, RADII);
    form.sigmas[1] = 1.5;
    expect(validateForm(form).join(" ")).toContain("sigmas");
  });

  it("rejects all-zero rho weights", () => {
    const form = defaultForm(TIERS, RADII);
    form.rhos = [0, 0, 0];
    expect(validateForm(form).join(" ")).toContain("rho");
  });

  it("rejects a broken priority permutation", () => {
    const form = defaultForm(TIERS, RADII);
    form.priority = ["B", "B", "E", "F", "G", "R", "I", "T"];
    expect(validateForm(form).join(" ")).toContain("priority");
  });

  it("rejects a nonpositive construction total", () => {
    const form = defaultForm(TIERS, RADII);
    form.bTotal = 0;
    expect(validateForm(form).join(" ")).toContain("construction total");
  });

  it("rejects a nonpositive radius", () => {
    const form = defaultForm(TIERS, RADII);
    form.radii[0] = -5;
    expect(validateForm(form).join(" ")).toContain("radii");
  });
});

describe("renormalize", () => {
  it("rescales to unit sum", () => {
    const out = renormalize({ R: 2, B: 1, A: 1 });
    expect(out.R).toBeCloseTo(0.5, 12);
    expect(out.B).toBeCloseTo(0.25, 12);
    const total = Object.values(out).reduce((a, b) => a + b, 0);
    expect(total).toBeCloseTo(1, 12);
  });

  it("leaves an all-zero vector untouched", () => {
    expect(renormalize({ R: 0, B: 0 })).toEqual({ R: 0, B: 0 });
  });
});

describe("export/import round trip", () => {
  it("reproduces identical bytes", () => {
    const form = defaultForm(TIERS, RADII);
    form.sigmas = [0.2, 0.2, 0.8];
    form.rhos = [0.5, 0.25, 0.25];
    const first = exportPolicy(form);
    const second = exportPolicy(importPolicy(first));
    expect(second).toBe(first);
  });

  it("rejects a file with a missing field", () => {
    const form = defaultForm(TIERS, RADII);
    const doc = JSON.parse(exportPolicy(form)) as Record<string, unknown>;
    delete doc.priority;
    expect(() => importPolicy(JSON.stringify(doc))).toThrow("priority");
  });

  it("rejects a file that fails validation", () => {
    const form = defaultForm(TIERS, RADII);
    const doc = JSON.parse(exportPolicy(form)) as Record<string, unknown>;
    doc.b_total = -1;
    expect(() => importPolicy(JSON.stringify(doc))).toThrow("invalid policy");
  });
});

describe("toRequestBody", () => {
  it("uses snake_case keys and sorted share keys", () => {
    const body = toRequestBody(defaultForm(TIERS, RADII));
    expect(body.b_total).toBe(6_000_000);
    expect(Object.keys(body.shares ?? {})).toEqual(
      ["A", "B", "E", "F", "G", "I", "R", "T"]);
  });

  it("copies arrays rather than aliasing form state", () => {
    const form = defaultForm(TIERS, RADII);
    const body = toRequestBody(form);
    body.radii![0] = 1;
    expect(form.radii[0]).toBe(1200);
  });
});

describe("movePriority", () => {
  it("swaps with the neighbor in the given direction", () => {
    expect(movePriority(["B", "A", "E"], "A", -1)).toEqual(["A", "B", "E"]);
    expect(movePriority(["B", "A", "E"], "A", 1)).toEqual(["B", "E", "A"]);
  });

  it("is a no-op at the boundary or for unknown uses", () => {
    expect(movePriority(["B", "A"], "B", -1)).toEqual(["B", "A"]);
    expect(movePriority(["B", "A"], "Z", 1)).toEqual(["B", "A"]);
  });
});
