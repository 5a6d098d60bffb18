import { describe, expect, it } from "vitest";

import { quantizeProbs } from "../src/quantize.js";

function probs(values: number[]): Float64Array {
  return Float64Array.from(values);
}

describe("quantizeProbs", () => {
  it("splits 0.8/0.2 exactly like the client's rule", () => {
    expect([...quantizeProbs(probs([0.8, 0.2]), 16)]).toEqual([52429, 13107]);
  });

  it("keeps every symbol decodable", () => {
    expect([...quantizeProbs(probs([1.0, 0.0]), 8)]).toEqual([255, 1]);
  });

  it("is symmetric on equal mass", () => {
    expect([...quantizeProbs(probs([0.5, 0.5]), 8)]).toEqual([128, 128]);
  });

  it("always sums to 2^precision with min >= 1", () => {
    for (let round = 0; round < 50; round++) {
      const vector = Float64Array.from({ length: 256 }, (_, i) => ((i * 2654435761 + round) % 1000) / 1000 + 1e-9);
      const freqs = quantizeProbs(vector, 24);
      let sum = 0;
      let min = Infinity;
      for (const f of freqs) {
        sum += f;
        min = Math.min(min, f);
      }
      expect(sum).toBe(2 ** 24);
      expect(min).toBeGreaterThanOrEqual(1);
    }
  });

  it("rejects impossible precision", () => {
    expect(() => quantizeProbs(probs([0.25, 0.25, 0.25, 0.25]), 2)).toThrow();
  });
});
