// Text <-> token ids. The wire contract fixes token ids to the Unicode
// code points of the serialized text; the serialized alphabets live in
// latin-1, so ids are byte values and the mapping is trivially invertible.

export const VOCAB_SIZE = 256;

export function tokenize(text: string): Uint32Array {
  const ids = new Uint32Array(text.length);
  for (let i = 0; i < text.length; i++) {
    const cp = text.charCodeAt(i);
    if (cp >= VOCAB_SIZE) throw new Error(`character U+${cp.toString(16)} outside latin-1 at ${i}`);
    ids[i] = cp;
  }
  return ids;
}

export function detokenize(ids: ArrayLike<number>): string {
  let out = "";
  for (let i = 0; i < ids.length; i++) out += String.fromCharCode(ids[i]);
  return out;
}

const HEX = "0123456789abcdef";

const SEPARATORS: Record<string, string> = {
  none: "",
  space: " ",
  comma: ",",
  comma_space: ", ",
  semicolon: ";",
};

// Serialize raw bytes the way the compression side does for hex schemes:
// high nibble then low nibble per byte, a separator between groups of
// bytesPerGroup bytes, none trailing. Used to turn .f32 training corpora
// into the text distribution the model should learn.
export function serializeBytes(data: Buffer, separator: string, bytesPerGroup: number | null): string {
  const sep = SEPARATORS[separator];
  if (sep === undefined) throw new Error(`unknown separator ${separator}`);
  if (sep !== "" && (bytesPerGroup === null || bytesPerGroup < 1)) {
    throw new Error("a separator requires bytes-per-group");
  }
  const parts: string[] = [];
  let group = "";
  for (let i = 0; i < data.length; i++) {
    group += HEX[data[i] >> 4] + HEX[data[i] & 0x0f];
    if (bytesPerGroup !== null && (i + 1) % bytesPerGroup === 0) {
      parts.push(group);
      group = "";
    }
  }
  if (group !== "") parts.push(group);
  return parts.join(sep);
}

export function parseSchemeText(scheme: string): { separator: string; bytesPerGroup: number | null } {
  const parts = scheme.split(":");
  if (parts[0] !== "hex") throw new Error(`trainer only serializes hex schemes, got ${scheme}`);
  if (parts.length === 2 && parts[1] === "none") return { separator: "none", bytesPerGroup: null };
  if (parts.length !== 3) throw new Error(`expected hex:<separator>:<bpg>, got ${scheme}`);
  return { separator: parts[1], bytesPerGroup: Number(parts[2]) };
}
