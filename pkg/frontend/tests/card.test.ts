import { describe, expect, it } from "vitest";
import { formatValue, objectiveCard } from "../src/card.js";
import type { NormMetrics, RawMetrics } from "../src/types.js";

const RAW: RawMetrics = {
  au: 123456.789,
  one_minus_au: 0.4321,
  d_b: 0.001234,
  d_lu: 0.006048,
  d_cs: 0.0123,
  jh_pen: 0.04,
};

describe("objectiveCard", () => {
  it("shows the response values verbatim, never recomputed", () => {
    const entries = objectiveCard(RAW);
    const byKey = Object.fromEntries(entries.map((e) => [e.key, e.raw]));
    expect(byKey.au).toBe(RAW.au);
    expect(byKey.one_minus_au).toBe(RAW.one_minus_au);
    expect(byKey.d_b).toBe(RAW.d_b);
    expect(byKey.d_lu).toBe(RAW.d_lu);
    expect(byKey.d_cs).toBe(RAW.d_cs);
    expect(byKey.jh_pen).toBe(RAW.jh_pen);
  });

  it("attaches normalized values when a batch context is supplied", () => {
    const norm: NormMetrics = { one_minus_au: 0.1, d_b: 0.2, d_lu: 0.3,
                                d_cs: 0.4, d_total: 0.5, jh_pen: 0.6 };
    const entries = objectiveCard(RAW, norm);
    const byKey = Object.fromEntries(entries.map((e) => [e.key, e.norm]));
    expect(byKey.d_total).toBe(0.5);
    expect(byKey.d_lu).toBe(0.3);
    expect(byKey.au).toBeNull();
  });

  it("omits d_total when no normalized context exists", () => {
    const keys = objectiveCard(RAW).map((e) => e.key);
    expect(keys).not.toContain("d_total");
  });

  it("labels every entry", () => {
    for (const entry of objectiveCard(RAW)) {
      expect(entry.label.length).toBeGreaterThan(0);
    }
  });
});

describe("formatValue", () => {
  it("keeps moderate magnitudes at fixed precision", () => {
    expect(formatValue(0.4321)).toBe("0.4321");
    expect(formatValue(0)).toBe("0.0000");
  });

  it("switches to exponential for extremes", () => {
    expect(formatValue(0.0000123)).toBe("1.230e-5");
    expect(formatValue(6_000_000)).toBe("6.000e+6");
  });

  it("renders NaN as a dash", () => {
    expect(formatValue(NaN)).toBe("-");
  });
});
