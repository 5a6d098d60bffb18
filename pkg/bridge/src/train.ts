// Offline training: corpus file -> frozen model file. A .f32 corpus is
// serialized to hex text first (same convention as the compression side);
// a .txt corpus is taken verbatim as latin-1.

import * as fs from "node:fs";

import { NgramModel, serializeModel, train } from "./ngram.js";
import { parseSchemeText, serializeBytes, tokenize } from "./tokenizer.js";

export interface TrainOptions {
  corpusPath: string;
  outPath: string;
  scheme: string; // for .f32 corpora
  maxBytes: number; // cap on raw corpus bytes before serialization
  maxOrder: number;
  precisionBits: number;
}

export function corpusText(options: TrainOptions): string {
  let raw = fs.readFileSync(options.corpusPath);
  if (raw.length > options.maxBytes) raw = raw.subarray(0, options.maxBytes);
  if (options.corpusPath.endsWith(".f32")) {
    const { separator, bytesPerGroup } = parseSchemeText(options.scheme);
    return serializeBytes(raw, separator, bytesPerGroup);
  }
  return raw.toString("latin1");
}

export function trainToFile(options: TrainOptions): NgramModel {
  const text = corpusText(options);
  const tokens = tokenize(text);
  const modelId = `ngram-${options.maxOrder}:${options.scheme}`;
  const model = train(tokens, options.maxOrder, options.precisionBits, modelId);
  fs.writeFileSync(options.outPath, serializeModel(model));
  return model;
}
