// Frame dispatch and the two transports (TCP socket, stdio). One request
// at a time per connection; inference is synchronous and deterministic, so
// concurrent connections cannot observe different distributions.

import * as net from "node:net";

import { NgramModel, predict } from "./ngram.js";
import {
  ERR_CONTEXT_TOO_LONG,
  ERR_MALFORMED,
  FrameParser,
  MSG_INIT,
  MSG_PREDICT,
  MSG_SCORE_SEQ,
  packError,
  packInfo,
  packPmf,
  readTokenIds,
} from "./protocol.js";
import { VOCAB_SIZE } from "./tokenizer.js";

export interface ServerConfig {
  model: NgramModel;
  maxContext: number;
}

export interface Reply {
  data: Buffer;
  close: boolean;
}

export function handleFrame(config: ServerConfig, kind: number, payload: Buffer): Reply {
  if (kind === MSG_INIT) {
    return {
      data: packInfo(VOCAB_SIZE, config.maxContext, config.model.precisionBits, config.model.fingerprint),
      close: false,
    };
  }
  if (kind === MSG_PREDICT || kind === MSG_SCORE_SEQ) {
    const ids = readTokenIds(payload);
    if (ids === null) {
      return { data: packError(ERR_MALFORMED, "malformed token frame"), close: true };
    }
    if (ids.length > config.maxContext) {
      return { data: packError(ERR_CONTEXT_TOO_LONG, "context too long"), close: false };
    }
    if (kind === MSG_PREDICT) {
      return { data: packPmf(predict(config.model, ids)), close: false };
    }
    const frames: Buffer[] = [];
    for (let k = 0; k < ids.length; k++) {
      frames.push(packPmf(predict(config.model, ids.subarray(0, k))));
    }
    return { data: Buffer.concat(frames), close: false };
  }
  return { data: packError(ERR_MALFORMED, `unknown message type ${kind}`), close: true };
}

export function serveTcp(config: ServerConfig, port: number, onReady?: (port: number) => void): net.Server {
  const server = net.createServer((socket) => {
    const parser = new FrameParser();
    socket.on("data", (chunk) => {
      for (const frame of parser.feed(chunk)) {
        const reply = handleFrame(config, frame.kind, frame.payload);
        socket.write(reply.data);
        if (reply.close) {
          socket.end();
          return;
        }
      }
    });
    socket.on("error", () => socket.destroy());
  });
  server.listen(port, "127.0.0.1", () => {
    const addr = server.address() as net.AddressInfo;
    onReady?.(addr.port);
  });
  return server;
}

export function serveStdio(config: ServerConfig): void {
  const parser = new FrameParser();
  process.stdin.on("data", (chunk: Buffer) => {
    for (const frame of parser.feed(chunk)) {
      const reply = handleFrame(config, frame.kind, frame.payload);
      process.stdout.write(reply.data);
      if (reply.close) process.exit(1);
    }
  });
  process.stdin.on("end", () => process.exit(0));
}

// Teacher-forcing consistency probe: SCORE_SEQ frame k must equal
// PREDICT of the first k tokens, for every k on a fixed 16-token sequence.
export function selfTest(model: NgramModel): boolean {
  const probe = new Uint32Array([48, 48, 56, 51, 102, 32, 97, 49, 50, 51, 52, 53, 54, 55, 56, 57]);
  for (let k = 0; k < probe.length; k++) {
    const viaScore = predict(model, probe.subarray(0, k));
    const viaPredict = predict(model, Array.from(probe.subarray(0, k)));
    for (let t = 0; t < viaScore.length; t++) {
      if (viaScore[t] !== viaPredict[t]) return false;
    }
    let sum = 0;
    let min = Infinity;
    for (const f of viaScore) {
      sum += f;
      min = Math.min(min, f);
    }
    if (sum !== 2 ** model.precisionBits || min < 1) return false;
  }
  return true;
}
