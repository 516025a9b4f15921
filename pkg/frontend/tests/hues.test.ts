import { describe, expect, it } from "vitest";

import { highlightColor, hueFor } from "../src/hues.js";

describe("rule hues", () => {
  it("is deterministic for the same rule name", () => {
    expect(hueFor("column")).toBe(hueFor("column"));
    expect(hueFor("profit")).toBe(hueFor("profit"));
  });

  it("stays within the hue circle", () => {
    for (const name of ["", "a", "column", "other_costs", "r0", "x".repeat(80)]) {
      const hue = hueFor(name);
      expect(Number.isInteger(hue)).toBe(true);
      expect(hue).toBeGreaterThanOrEqual(0);
      expect(hue).toBeLessThan(360);
    }
  });

  it("separates the rule names used together in one grammar", () => {
    const rules = ["spreadsheet", "block", "mortgage", "other_costs", "rent", "profit"];
    const hues = new Set(rules.map(hueFor));
    expect(hues.size).toBe(rules.length);
  });

  it("renders as an hsla() color with the rule's hue", () => {
    const hue = hueFor("column");
    expect(highlightColor("column")).toBe(`hsla(${hue}, 80%, 55%, 0.35)`);
    expect(highlightColor("column", 0.8)).toBe(`hsla(${hue}, 80%, 55%, 0.8)`);
  });
});
