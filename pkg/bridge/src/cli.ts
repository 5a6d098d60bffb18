#!/usr/bin/env node
// bridge CLI:
//   train --corpus g.f32 --out model.json [--scheme hex:space:4]
//         [--max-bytes 262144] [--orders 6] [--precision 24]
//   serve --model model.json [--listen 9129 | --stdio]
//         [--max-context 4096] [--self-test]

import * as fs from "node:fs";

import { deserializeModel } from "./ngram.js";
import { selfTest, serveStdio, serveTcp } from "./server.js";
import { trainToFile } from "./train.js";

interface Args {
  command: string;
  [key: string]: string | boolean;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { command: argv[0] ?? "" };
  for (let i = 1; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument ${arg}`);
    const key = arg.slice(2);
    if (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
      args[key] = argv[++i];
    } else {
      args[key] = true;
    }
  }
  return args;
}

function str(args: Args, key: string, fallback?: string): string {
  const value = args[key];
  if (typeof value === "string") return value;
  if (fallback !== undefined) return fallback;
  throw new Error(`missing --${key}`);
}

function num(args: Args, key: string, fallback: number): number {
  const value = args[key];
  if (value === undefined) return fallback;
  const parsed = Number(value);
  if (!Number.isFinite(parsed)) throw new Error(`--${key} must be a number`);
  return parsed;
}

function main(): void {
  const args = parseArgs(process.argv.slice(2));
  if (args.command === "train") {
    const model = trainToFile({
      corpusPath: str(args, "corpus"),
      outPath: str(args, "out"),
      scheme: str(args, "scheme", "hex:space:4"),
      maxBytes: num(args, "max-bytes", 262144),
      maxOrder: num(args, "orders", 6),
      precisionBits: num(args, "precision", 24),
    });
    console.error(
      `trained ${model.modelId}: alphabet ${model.alphabet.length}, ` +
        `fingerprint 0x${model.fingerprint.toString(16)}`,
    );
    return;
  }
  if (args.command === "serve") {
    const model = deserializeModel(fs.readFileSync(str(args, "model"), "utf8"));
    const maxContext = num(args, "max-context", 4096);
    if (args["self-test"]) {
      const ok = selfTest(model);
      console.error(`self-test: ${ok ? "ok" : "FAILED"}`);
      if (!ok) process.exit(1);
      if (!args.listen && !args.stdio) return;
    }
    if (args.stdio) {
      serveStdio({ model, maxContext });
      return;
    }
    const port = num(args, "listen", 0);
    serveTcp({ model, maxContext }, port, (bound) => {
      // parsed by launchers waiting for readiness
      console.error(`listening 127.0.0.1:${bound} fingerprint 0x${model.fingerprint.toString(16)}`);
    });
    return;
  }
  console.error("usage: cli.js train|serve [options]");
  process.exit(2);
}

try {
  main();
} catch (err) {
  console.error(`error: ${err instanceof Error ? err.message : err}`);
  process.exit(2);
}
