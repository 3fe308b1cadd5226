/**
 * Text featurization: hashed bag of word unigrams and bigrams.
 *
 * Tokens are lowercased, whitespace-split and stripped of surrounding
 * ASCII punctuation. Each feature string hashes (FNV-1a) to a slot in a
 * fixed-width vector with a hash-derived sign, and the sparse vector is
 * l2-normalized so sentence length does not dominate the dot products.
 */

const PUNCT = /^[!-\/:-@\[-`{-~]+|[!-\/:-@\[-`{-~]+$/g;

export function tokenize(text: string): string[] {
  const tokens: string[] = [];
  for (const piece of text.toLowerCase().split(/\s+/)) {
    const token = piece.replace(PUNCT, "");
    if (token.length > 0) {
      tokens.push(token);
    }
  }
  return tokens;
}

function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

/** Sparse feature vector: slot index -> signed count. */
export type SparseVector = Map<number, number>;

export function featurize(text: string, dim: number): SparseVector {
  const tokens = tokenize(text);
  const features: string[] = [...tokens];
  const padded = ["<s>", ...tokens, "</s>"];
  for (let i = 0; i + 1 < padded.length; i++) {
    features.push(`${padded[i]}_${padded[i + 1]}`);
  }
  const vector: SparseVector = new Map();
  for (const feature of features) {
    const hash = fnv1a(feature);
    const slot = hash % dim;
    const sign = (hash & 0x80000000) === 0 ? 1 : -1;
    vector.set(slot, (vector.get(slot) ?? 0) + sign);
  }
  let norm = 0;
  for (const value of vector.values()) {
    norm += value * value;
  }
  if (norm > 0) {
    const scale = 1 / Math.sqrt(norm);
    for (const [slot, value] of vector) {
      vector.set(slot, value * scale);
    }
  }
  return vector;
}

export function dot(weights: number[], vector: SparseVector): number {
  let sum = 0;
  for (const [slot, value] of vector) {
    sum += weights[slot]! * value;
  }
  return sum;
}

/** a - b, kept sparse. */
export function subtract(a: SparseVector, b: SparseVector): SparseVector {
  const out: SparseVector = new Map(a);
  for (const [slot, value] of b) {
    const next = (out.get(slot) ?? 0) - value;
    if (next === 0) {
      out.delete(slot);
    } else {
      out.set(slot, next);
    }
  }
  return out;
}

export function addScaled(weights: number[], vector: SparseVector, scale: number): void {
  for (const [slot, value] of vector) {
    weights[slot]! += scale * value;
  }
}
