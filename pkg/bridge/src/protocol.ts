// Length-prefixed binary frames shared with the compression client.
// Frame = u32-LE payload length, u8 message type, payload. Token ids are
// the code points of the serialized text. Requests on one connection are
// strictly sequential; every request gets exactly one reply (SCORE_SEQ
// gets one PMF frame per scored position).

export const MSG_INIT = 1;
export const MSG_INFO = 2;
export const MSG_PREDICT = 3;
export const MSG_PMF = 4;
export const MSG_SCORE_SEQ = 5;
export const MSG_ERROR = 255;

export const ERR_CONTEXT_TOO_LONG = 1;
export const ERR_MALFORMED = 2;

export interface Frame {
  kind: number;
  payload: Buffer;
}

export function packFrame(kind: number, payload: Buffer): Buffer {
  const head = Buffer.alloc(5);
  head.writeUInt32LE(payload.length, 0);
  head.writeUInt8(kind, 4);
  return Buffer.concat([head, payload]);
}

export function packInfo(
  vocabSize: number,
  maxContext: number,
  precisionBits: number,
  fingerprint: bigint,
): Buffer {
  const payload = Buffer.alloc(17);
  payload.writeUInt32LE(vocabSize, 0);
  payload.writeUInt32LE(maxContext, 4);
  payload.writeUInt8(precisionBits, 8);
  payload.writeBigUInt64LE(fingerprint, 9);
  return packFrame(MSG_INFO, payload);
}

export function packPmf(freqs: Uint32Array): Buffer {
  const payload = Buffer.alloc(4 * freqs.length);
  for (let i = 0; i < freqs.length; i++) payload.writeUInt32LE(freqs[i], 4 * i);
  return packFrame(MSG_PMF, payload);
}

export function packError(code: number, message: string): Buffer {
  const text = Buffer.from(message, "utf8");
  const payload = Buffer.alloc(2 + text.length);
  payload.writeUInt16LE(code, 0);
  text.copy(payload, 2);
  return packFrame(MSG_ERROR, payload);
}

export function readTokenIds(payload: Buffer): Uint32Array | null {
  if (payload.length < 4) return null;
  const n = payload.readUInt32LE(0);
  if (payload.length !== 4 + 4 * n) return null;
  const ids = new Uint32Array(n);
  for (let i = 0; i < n; i++) ids[i] = payload.readUInt32LE(4 + 4 * i);
  return ids;
}

// Incremental frame parser: feed() chunks, take() complete frames.
export class FrameParser {
  private buf: Buffer = Buffer.alloc(0);

  feed(chunk: Buffer): Frame[] {
    this.buf = this.buf.length ? Buffer.concat([this.buf, chunk]) : chunk;
    const frames: Frame[] = [];
    for (;;) {
      if (this.buf.length < 5) break;
      const length = this.buf.readUInt32LE(0);
      if (this.buf.length < 5 + length) break;
      frames.push({ kind: this.buf.readUInt8(4), payload: this.buf.subarray(5, 5 + length) });
      this.buf = this.buf.subarray(5 + length);
    }
    return frames;
  }
}
