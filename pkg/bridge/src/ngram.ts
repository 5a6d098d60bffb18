// Frozen interpolated n-gram character model: the causal LM behind the
// PMF service. Training counts (context, next-token) pairs at every order
// 0..maxOrder; prediction blends orders recursively,
//
//   p_o(t | ctx) = (count_o(ctx, t) + p_{o-1}(t)) / (total_o(ctx) + 1)
//
// starting from the uniform distribution over the 256-token vocabulary,
// so unseen contexts fall back smoothly and every token keeps mass. The
// model never updates after training; identical contexts always produce
// identical distributions, which is what makes encode/decode symmetric.
//
// Contexts are packed into numbers: each character maps to a dense id in
// the training alphabet (plus one spare id for characters never seen in
// training), and a length-o context is an o-digit number in base
// (alphabet+1). Orders are capped so keys stay inside 2^53.

import { createHash } from "node:crypto";

import { VOCAB_SIZE } from "./tokenizer.js";
import { QUANT_RULE_VERSION, quantizeProbs } from "./quantize.js";

export interface ContextStats {
  total: number;
  counts: Map<number, number>;
}

export interface NgramModel {
  modelId: string;
  maxOrder: number;
  precisionBits: number;
  alphabet: number[]; // code point per dense id, sorted ascending
  tables: Map<number, ContextStats>[]; // one per order 0..maxOrder
  fingerprint: bigint;
}

export const MODEL_FORMAT_VERSION = 1;

function denseIds(alphabet: number[]): Int16Array {
  const map = new Int16Array(VOCAB_SIZE).fill(-1);
  alphabet.forEach((cp, i) => {
    map[cp] = i;
  });
  return map;
}

function checkOrderFits(alphabetSize: number, maxOrder: number): void {
  if ((alphabetSize + 1) ** maxOrder > Number.MAX_SAFE_INTEGER) {
    throw new Error(`order ${maxOrder} overflows context keys for alphabet ${alphabetSize}`);
  }
}

export function train(
  tokens: Uint32Array,
  maxOrder: number,
  precisionBits: number,
  modelId: string,
): NgramModel {
  const seen = new Set<number>();
  for (const t of tokens) seen.add(t);
  const alphabet = [...seen].sort((a, b) => a - b);
  checkOrderFits(alphabet.length, maxOrder);
  const ids = denseIds(alphabet);
  const base = alphabet.length + 1;

  const tables: Map<number, ContextStats>[] = [];
  for (let order = 0; order <= maxOrder; order++) tables.push(new Map());

  for (let order = 0; order <= maxOrder; order++) {
    const table = tables[order];
    const span = base ** order;
    let key = 0; // rolling context key over the last `order` dense ids
    for (let pos = 0; pos < tokens.length; pos++) {
      if (pos >= order) {
        let stats = table.get(key);
        if (stats === undefined) {
          stats = { total: 0, counts: new Map() };
          table.set(key, stats);
        }
        const tok = tokens[pos];
        stats.total += 1;
        stats.counts.set(tok, (stats.counts.get(tok) ?? 0) + 1);
      }
      if (order > 0) key = (key * base + ids[tokens[pos]]) % span;
    }
  }

  const model: NgramModel = {
    modelId,
    maxOrder,
    precisionBits,
    alphabet,
    tables,
    fingerprint: 0n,
  };
  model.fingerprint = fingerprintOf(model);
  return model;
}

// Fingerprint over (model id, canonical weight serialization, precision,
// quantization rule version); embedded in every bitstream header so a
// decode against different weights refuses instead of corrupting.
export function fingerprintOf(model: NgramModel): bigint {
  const hash = createHash("sha256");
  hash.update(`${model.modelId}|order=${model.maxOrder}|p=${model.precisionBits}|${QUANT_RULE_VERSION}|`);
  hash.update(model.alphabet.join(","));
  for (let order = 0; order <= model.maxOrder; order++) {
    const keys = [...model.tables[order].keys()].sort((a, b) => a - b);
    for (const key of keys) {
      const stats = model.tables[order].get(key)!;
      const toks = [...stats.counts.keys()].sort((a, b) => a - b);
      hash.update(`|${order}:${key}=`);
      for (const tok of toks) hash.update(`${tok}.${stats.counts.get(tok)},`);
    }
  }
  return hash.digest().readBigUInt64LE(0);
}

export function contextKeys(model: NgramModel, context: ArrayLike<number>): number[] {
  const ids = denseIds(model.alphabet);
  const unk = model.alphabet.length;
  const base = model.alphabet.length + 1;
  const keys: number[] = [0];
  for (let order = 1; order <= model.maxOrder; order++) {
    if (order > context.length) {
      keys.push(-1);
      continue;
    }
    let key = 0;
    for (let j = context.length - order; j < context.length; j++) {
      const id = ids[context[j]];
      key = key * base + (id < 0 ? unk : id);
    }
    keys.push(key);
  }
  return keys;
}

export function probabilities(model: NgramModel, context: ArrayLike<number>): Float64Array {
  const probs = new Float64Array(VOCAB_SIZE).fill(1 / VOCAB_SIZE);
  const keys = contextKeys(model, context);
  for (let order = 0; order <= model.maxOrder; order++) {
    if (keys[order] < 0) break; // context shorter than this order
    const stats = model.tables[order].get(keys[order]);
    if (stats === undefined) continue;
    const scale = 1 / (stats.total + 1);
    for (let t = 0; t < VOCAB_SIZE; t++) probs[t] *= scale;
    for (const [tok, count] of stats.counts) probs[tok] += count * scale;
  }
  return probs;
}

export function predict(model: NgramModel, context: ArrayLike<number>): Uint32Array {
  return quantizeProbs(probabilities(model, context), model.precisionBits);
}

// ------------------------------------------------------------- model file

interface ModelDoc {
  format_version: number;
  model_id: string;
  max_order: number;
  precision_bits: number;
  alphabet: number[];
  // per order: flat [key, total, pairCount, tok, count, tok, count, ...]
  tables: number[][];
}

export function serializeModel(model: NgramModel): string {
  const tables: number[][] = [];
  for (let order = 0; order <= model.maxOrder; order++) {
    const flat: number[] = [];
    const keys = [...model.tables[order].keys()].sort((a, b) => a - b);
    for (const key of keys) {
      const stats = model.tables[order].get(key)!;
      const toks = [...stats.counts.keys()].sort((a, b) => a - b);
      flat.push(key, stats.total, toks.length);
      for (const tok of toks) flat.push(tok, stats.counts.get(tok)!);
    }
    tables.push(flat);
  }
  const doc: ModelDoc = {
    format_version: MODEL_FORMAT_VERSION,
    model_id: model.modelId,
    max_order: model.maxOrder,
    precision_bits: model.precisionBits,
    alphabet: model.alphabet,
    tables,
  };
  return JSON.stringify(doc);
}

export function deserializeModel(text: string): NgramModel {
  const doc = JSON.parse(text) as ModelDoc;
  if (doc.format_version !== MODEL_FORMAT_VERSION) {
    throw new Error(`unsupported model format_version ${doc.format_version}`);
  }
  const tables: Map<number, ContextStats>[] = [];
  for (const flat of doc.tables) {
    const table = new Map<number, ContextStats>();
    let i = 0;
    while (i < flat.length) {
      const key = flat[i];
      const total = flat[i + 1];
      const pairs = flat[i + 2];
      i += 3;
      const counts = new Map<number, number>();
      for (let p = 0; p < pairs; p++) {
        counts.set(flat[i], flat[i + 1]);
        i += 2;
      }
      table.set(key, { total, counts });
    }
    tables.push(table);
  }
  const model: NgramModel = {
    modelId: doc.model_id,
    maxOrder: doc.max_order,
    precisionBits: doc.precision_bits,
    alphabet: doc.alphabet,
    tables,
    fingerprint: 0n,
  };
  model.fingerprint = fingerprintOf(model);
  return model;
}
