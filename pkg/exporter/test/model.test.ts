import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { beforeAll, describe, expect, it } from "vitest";

import type { ChoiceInstance, PairInstance } from "../src/csv.js";
import {
  CHECKPOINT_FORMAT,
  Checkpoint,
  hardenChoice,
  hardenPair,
  loadCheckpoint,
  predictChoice,
  predictPair,
  saveCheckpoint,
  sigmoid,
  softmax,
} from "../src/model.js";
import { mulberry32 } from "../src/rng.js";

function makeCheckpoint(dim: number, seed: number): Checkpoint {
  const rand = mulberry32(seed);
  const head = () => Array.from({ length: dim }, () => 0.1 * (2 * rand() - 1));
  return { format: CHECKPOINT_FORMAT, dim, taskA: { w: head() }, taskB: { w: head() }, meta: {} };
}

describe("sigmoid", () => {
  it("maps 0 to one half", () => {
    expect(sigmoid(0)).toBe(0.5);
  });

  it("is stable for large magnitudes", () => {
    expect(sigmoid(1000)).toBe(1);
    expect(sigmoid(-1000)).toBe(0);
  });

  it("is complementary under negation", () => {
    for (const z of [0.1, 1.5, 3, 17]) {
      expect(Math.abs(sigmoid(z) + sigmoid(-z) - 1)).toBeLessThan(1e-15);
    }
  });
});

describe("softmax", () => {
  it("sums to one", () => {
    const probs = softmax([0.3, -1.2, 2.5]);
    const total = probs.reduce((sum, p) => sum + p, 0);
    expect(Math.abs(total - 1)).toBeLessThan(1e-12);
  });

  it("is invariant under a constant logit shift", () => {
    const a = softmax([1, 2, 3]);
    const b = softmax([101, 102, 103]);
    a.forEach((p, j) => expect(Math.abs(p - b[j]!)).toBeLessThan(1e-12));
  });

  it("handles logits beyond exp overflow", () => {
    const probs = softmax([1000, 1000, 1000]);
    probs.forEach((p) => expect(Math.abs(p - 1 / 3)).toBeLessThan(1e-12));
  });
});

describe("checkpoint io", () => {
  let dir: string;

  beforeAll(() => {
    dir = mkdtempSync(join(tmpdir(), "exporter-ckpt-"));
  });

  it("round-trips through save and load", () => {
    const path = join(dir, "roundtrip.json");
    const checkpoint = makeCheckpoint(16, 3);
    saveCheckpoint(path, checkpoint);
    expect(loadCheckpoint(path)).toEqual(checkpoint);
  });

  it("rejects an unknown format tag", () => {
    const path = join(dir, "format.json");
    const bad = { ...makeCheckpoint(16, 3), format: "other-v9" };
    writeFileSync(path, JSON.stringify(bad));
    expect(() => loadCheckpoint(path)).toThrow(/format/i);
  });

  it("rejects head widths that disagree with dim", () => {
    const path = join(dir, "width.json");
    const bad = makeCheckpoint(16, 3);
    bad.taskA.w.push(0);
    writeFileSync(path, JSON.stringify(bad));
    expect(() => loadCheckpoint(path)).toThrow(/widths/);
  });

  it("rejects non-finite weights", () => {
    const path = join(dir, "inf.json");
    // 1e999 parses to Infinity, which JSON.stringify could never emit
    const w = "[1e999" + ",0".repeat(15) + "]";
    writeFileSync(
      path,
      `{"format":"${CHECKPOINT_FORMAT}","dim":16,"taskA":{"w":${w}},"taskB":{"w":${w}}}`,
    );
    expect(() => loadCheckpoint(path)).toThrow(/finite/);
  });

  it("reports the path for malformed JSON", () => {
    const path = join(dir, "broken.json");
    writeFileSync(path, "{nope");
    expect(() => loadCheckpoint(path)).toThrow(/broken.json/);
  });
});

describe("pair head", () => {
  const checkpoint = makeCheckpoint(128, 11);

  it("is complementary under sentence swap", () => {
    const inst: PairInstance = { id: 1, sent0: "the cat sat", sent1: "sat cat the" };
    const swapped: PairInstance = { id: 1, sent0: inst.sent1, sent1: inst.sent0 };
    const p = predictPair(checkpoint, inst);
    const q = predictPair(checkpoint, swapped);
    expect(Math.abs(p + q - 1)).toBeLessThan(1e-12);
  });

  it("scores identical sentences at exactly one half", () => {
    const inst: PairInstance = { id: 2, sent0: "same words", sent1: "same words" };
    expect(predictPair(checkpoint, inst)).toBe(0.5);
  });
});

describe("choice head", () => {
  it("returns three positive probabilities summing to one", () => {
    const checkpoint = makeCheckpoint(128, 11);
    const inst: ChoiceInstance = {
      id: 7,
      falseStatement: "an elephant fits in a fridge",
      options: ["elephants are big", "fridges are cold", "both really"],
    };
    const probs = predictChoice(checkpoint, inst);
    expect(probs).toHaveLength(3);
    probs.forEach((p) => expect(p).toBeGreaterThan(0));
    expect(Math.abs(probs.reduce((sum, p) => sum + p, 0) - 1)).toBeLessThan(1e-12);
  });
});

describe("hardening", () => {
  it("thresholds pairs at one half, boundary up", () => {
    expect(hardenPair(0.49)).toBe(0);
    expect(hardenPair(0.5)).toBe(1);
    expect(hardenPair(0.51)).toBe(1);
  });

  it("argmaxes choices, ties to the lowest index", () => {
    expect(hardenChoice([0.1, 0.2, 0.7])).toBe(2);
    expect(hardenChoice([0.4, 0.4, 0.2])).toBe(0);
    expect(hardenChoice([1 / 3, 1 / 3, 1 / 3])).toBe(0);
  });
});
