import { describe, expect, it } from "vitest";

import { deserializeModel, predict, probabilities, serializeModel, train } from "../src/ngram.js";
import { serializeBytes, tokenize } from "../src/tokenizer.js";

function sampleModel(maxOrder = 4) {
  const bytes = Buffer.alloc(4096);
  for (let i = 0; i < bytes.length; i++) bytes[i] = (i * 37 + ((i * i) % 251)) & 0xff;
  const text = serializeBytes(bytes, "space", 4);
  return train(tokenize(text), maxOrder, 16, "test-model");
}

describe("n-gram model", () => {
  it("probabilities sum to one", () => {
    const model = sampleModel();
    for (const ctx of [[], tokenize("0000803f "), tokenize("ab")]) {
      const p = probabilities(model, Array.from(ctx));
      const sum = p.reduce((a, b) => a + b, 0);
      expect(Math.abs(sum - 1)).toBeLessThan(1e-9);
    }
  });

  it("is deterministic for equal contexts", () => {
    const model = sampleModel();
    const ctx = Array.from(tokenize("0000803f 00"));
    expect([...predict(model, ctx)]).toEqual([...predict(model, ctx)]);
  });

  it("prefers continuations it was trained on", () => {
    const tokens = tokenize("abab".repeat(500));
    const model = train(tokens, 2, 16, "alt");
    const afterA = predict(model, Array.from(tokenize("ab a".replace(/ /g, ""))));
    expect(afterA[98 /* 'b' */]).toBeGreaterThan(afterA[97 /* 'a' */]);
  });

  it("handles contexts with characters never seen in training", () => {
    const model = sampleModel();
    const freqs = predict(model, [7, 200, 255]);
    const sum = freqs.reduce((a, b) => a + b, 0);
    expect(sum).toBe(2 ** 16);
  });

  it("survives a serialize/deserialize round trip with the same fingerprint", () => {
    const model = sampleModel(3);
    const clone = deserializeModel(serializeModel(model));
    expect(clone.fingerprint).toBe(model.fingerprint);
    const ctx = Array.from(tokenize("0000"));
    expect([...predict(clone, ctx)]).toEqual([...predict(model, ctx)]);
  });

  it("changes fingerprint when weights change", () => {
    const a = sampleModel(2);
    const b = train(tokenize("different corpus entirely 123"), 2, 16, "test-model");
    expect(a.fingerprint).not.toBe(b.fingerprint);
  });
});
