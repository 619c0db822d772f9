import { describe, expect, it } from "vitest";
import { isSimplexRow, stackColumn, stackPanel } from "../src/attention.js";

describe("simplex check", () => {
  it("accepts valid rows and rejects bad ones", () => {
    expect(isSimplexRow([0.3, 0.7])).toBe(true);
    expect(isSimplexRow([1])).toBe(true);
    expect(isSimplexRow([0.5, 0.6])).toBe(false);
    expect(isSimplexRow([-0.1, 1.1])).toBe(false);
    expect(isSimplexRow([NaN, 1])).toBe(false);
    expect(isSimplexRow([])).toBe(false);
  });
});

describe("attention stacking", () => {
  it("segments tile the full panel height exactly", () => {
    const segments = stackColumn([0.2, 0.5, 0.3], 120);
    const total = segments.reduce((a, s) => a + s.height, 0);
    expect(total).toBe(120);
    expect(segments[0].y).toBe(0);
    expect(segments[2].y + segments[2].height).toBe(120);
  });

  it("segment heights are proportional to the weights", () => {
    const segments = stackColumn([0.25, 0.75], 100);
    expect(segments[0].height).toBeCloseTo(25, 9);
    expect(segments[1].height).toBeCloseTo(75, 9);
  });

  it("stacks in frame order with contiguous segments", () => {
    const segments = stackColumn([0.1, 0.2, 0.3, 0.4], 80);
    for (let k = 1; k < segments.length; k++) {
      expect(segments[k].frame).toBe(k);
      expect(segments[k].y).toBeCloseTo(
        segments[k - 1].y + segments[k - 1].height,
        9,
      );
    }
  });

  it("fills full height even for slightly off-simplex rows", () => {
    const segments = stackColumn([0.5, 0.5001], 60);
    const total = segments.reduce((a, s) => a + s.height, 0);
    expect(total).toBe(60);
  });

  it("rejects rows with no mass", () => {
    expect(() => stackColumn([0, 0], 50)).toThrow();
  });

  it("lays out one column per timestep", () => {
    const weights = Array.from({ length: 7 }, () => [0.4, 0.6]);
    expect(stackPanel(weights, 90).length).toBe(7);
  });
});
