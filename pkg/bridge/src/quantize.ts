// Largest-remainder quantization of a probability vector to integer
// frequencies summing to 2**precisionBits, every entry >= 1. This is the
// same rule the client library uses for static models, reproduced here so
// the wire format never depends on client float behavior: floor
// allocation, +1 to the largest remainders (ties to the lower symbol id),
// then zeros raised to 1 off the largest entries (ties to the lower id).

export const QUANT_RULE_VERSION = "largest-remainder:v1";

export function quantizeProbs(probs: Float64Array, precisionBits: number): Uint32Array {
  const vocab = probs.length;
  const total = 2 ** precisionBits;
  if (vocab < 2 || total < 2 * vocab) {
    throw new Error(`vocab ${vocab} too large for precision ${precisionBits}`);
  }
  let mass = 0;
  for (let i = 0; i < vocab; i++) {
    if (!(probs[i] >= 0) || !Number.isFinite(probs[i])) throw new Error(`bad probability at ${i}`);
    mass += probs[i];
  }
  if (mass <= 0) throw new Error("probabilities sum to zero");

  const freqs = new Uint32Array(vocab);
  const rem = new Float64Array(vocab);
  let allocated = 0;
  for (let i = 0; i < vocab; i++) {
    const scaled = (probs[i] / mass) * total;
    const base = Math.floor(scaled);
    freqs[i] = base;
    rem[i] = scaled - base;
    allocated += base;
  }

  const order = Array.from({ length: vocab }, (_, i) => i);
  order.sort((a, b) => (rem[b] !== rem[a] ? rem[b] - rem[a] : a - b));
  for (let k = 0; k < total - allocated; k++) freqs[order[k]] += 1;

  let zeros = 0;
  for (let i = 0; i < vocab; i++) {
    if (freqs[i] === 0) {
      freqs[i] = 1;
      zeros += 1;
    }
  }
  while (zeros > 0) {
    let best = 0;
    for (let i = 1; i < vocab; i++) if (freqs[i] > freqs[best]) best = i;
    freqs[best] -= 1;
    zeros -= 1;
  }
  return freqs;
}
