/**
 * The checkpoint format and its two classification heads.
 *
 * One shared featurizer feeds two linear heads over a hashed feature
 * space: the pair head scores each sentence of a task-A pair and turns
 * the score difference into P(sentence 1 is the invalid one) through a
 * sigmoid; the choice head scores statement+option concatenations and
 * softmaxes the three scores. Neither head carries a bias: a shared
 * offset cancels in the pair difference and shifts all three choice
 * logits equally, so it could never change a prediction.
 */
import { readFileSync, writeFileSync } from "node:fs";

import { z } from "zod";

import { SparseVector, dot, featurize } from "./features.js";
import type { ChoiceInstance, PairInstance } from "./csv.js";

export const CHECKPOINT_FORMAT = "hash-ff-v1";
const SEPARATOR = "</s>";

const finite = z.number().refine(Number.isFinite, { message: "must be finite" });

const checkpointSchema = z
  .object({
    format: z.literal(CHECKPOINT_FORMAT),
    dim: z.number().int().min(8),
    taskA: z.object({ w: z.array(finite) }),
    taskB: z.object({ w: z.array(finite) }),
    meta: z.record(z.unknown()).default({}),
  })
  .refine((c) => c.taskA.w.length === c.dim && c.taskB.w.length === c.dim, {
    message: "head widths must equal dim",
  });

export type Checkpoint = z.infer<typeof checkpointSchema>;

export function loadCheckpoint(path: string): Checkpoint {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch (error) {
    throw new Error(`checkpoint ${path}: ${(error as Error).message}`);
  }
  const parsed = checkpointSchema.safeParse(raw);
  if (!parsed.success) {
    throw new Error(`checkpoint ${path}: ${parsed.error.issues[0]?.message}`);
  }
  return parsed.data;
}

export function saveCheckpoint(path: string, checkpoint: Checkpoint): void {
  writeFileSync(path, JSON.stringify(checkpoint, null, 2) + "\n", "utf-8");
}

export function sigmoid(zValue: number): number {
  // evaluate the stable branch so large |z| cannot overflow
  if (zValue >= 0) {
    return 1 / (1 + Math.exp(-zValue));
  }
  const expz = Math.exp(zValue);
  return expz / (1 + expz);
}

export function softmax(logits: number[]): number[] {
  const top = Math.max(...logits);
  const exps = logits.map((value) => Math.exp(value - top));
  const total = exps.reduce((sum, value) => sum + value, 0);
  return exps.map((value) => value / total);
}

export function pairFeatures(inst: PairInstance, dim: number): [SparseVector, SparseVector] {
  return [featurize(inst.sent0, dim), featurize(inst.sent1, dim)];
}

export function choiceFeatures(inst: ChoiceInstance, dim: number): SparseVector[] {
  return inst.options.map((option) =>
    featurize(`${inst.falseStatement} ${SEPARATOR} ${option}`, dim)
  );
}

/** P(sentence 1 is the invalid one) for a task-A pair. */
export function predictPair(checkpoint: Checkpoint, inst: PairInstance): number {
  const [phi0, phi1] = pairFeatures(inst, checkpoint.dim);
  return sigmoid(dot(checkpoint.taskA.w, phi0) - dot(checkpoint.taskA.w, phi1));
}

/** 3-way softmax over the options of a task-B instance. */
export function predictChoice(checkpoint: Checkpoint, inst: ChoiceInstance): number[] {
  const logits = choiceFeatures(inst, checkpoint.dim).map((psi) =>
    dot(checkpoint.taskB.w, psi)
  );
  return softmax(logits);
}

/** Hard label: threshold at 0.5 (boundary maps to 1) or argmax. */
export function hardenPair(probability: number): number {
  return probability < 0.5 ? 0 : 1;
}

export function hardenChoice(probs: number[]): number {
  let best = 0;
  for (let j = 1; j < probs.length; j++) {
    if (probs[j]! > probs[best]!) {
      best = j;
    }
  }
  return best;
}
