/**
 * Seeded mini-batch SGD over the linear heads.
 *
 * Training minimizes log loss (pair head) or 3-way cross entropy
 * (choice head) starting from a base checkpoint. The dev-split
 * accuracy of the tuned checkpoint is returned so callers can use it
 * as the member's voting weight downstream.
 */
import {
  Dataset,
  loadTaskA,
  loadTaskB,
  type ChoiceInstance,
  type PairInstance,
  type Task,
} from "./csv.js";
import { SparseVector, addScaled, dot, subtract } from "./features.js";
import {
  Checkpoint,
  choiceFeatures,
  hardenChoice,
  hardenPair,
  pairFeatures,
  predictChoice,
  predictPair,
  sigmoid,
} from "./model.js";
import { mulberry32, shuffle } from "./rng.js";

export interface Hyperparameters {
  epochs: number;
  batchSize: number;
  learningRate: number;
  seed: number;
}

export const DEFAULT_HYPERPARAMETERS: Hyperparameters = {
  epochs: 5,
  batchSize: 16,
  learningRate: 0.5,
  seed: 0,
};

export interface FinetuneJob {
  task: Task;
  trainData: string;
  trainAnswers?: string;
  devData: string;
  devAnswers?: string;
  /** cap on training instances (first n in file order) */
  limit?: number;
  hyper: Hyperparameters;
}

export interface FinetuneResult {
  checkpoint: Checkpoint;
  devAccuracy: number;
  nTrain: number;
  nDev: number;
}

function requireLabels<I extends { label?: number }>(
  dataset: Dataset<I>,
  what: string
): void {
  if (dataset.instances.some((inst) => inst.label === undefined)) {
    throw new Error(`${what} data is unlabeled; provide its answer file`);
  }
}

function checkHyperparameters(hyper: Hyperparameters): void {
  if (!Number.isInteger(hyper.epochs) || hyper.epochs < 1) {
    throw new Error(`epochs must be a positive integer, got ${hyper.epochs}`);
  }
  if (!Number.isInteger(hyper.batchSize) || hyper.batchSize < 1) {
    throw new Error(`batch size must be a positive integer, got ${hyper.batchSize}`);
  }
  if (!(hyper.learningRate > 0) || !Number.isFinite(hyper.learningRate)) {
    throw new Error(`learning rate must be positive, got ${hyper.learningRate}`);
  }
  if (!Number.isInteger(hyper.seed)) {
    throw new Error(`seed must be an integer, got ${hyper.seed}`);
  }
}

function slice<I>(dataset: Dataset<I>, limit?: number): I[] {
  if (limit === undefined) {
    return dataset.instances;
  }
  if (!Number.isInteger(limit) || limit < 1) {
    throw new Error(`limit must be a positive integer, got ${limit}`);
  }
  return dataset.instances.slice(0, limit);
}

function trainPairHead(
  weights: number[],
  dim: number,
  instances: PairInstance[],
  hyper: Hyperparameters
): void {
  const diffs: SparseVector[] = [];
  const labels: number[] = [];
  for (const inst of instances) {
    const [phi0, phi1] = pairFeatures(inst, dim);
    diffs.push(subtract(phi0, phi1));
    labels.push(inst.label!);
  }
  const order = instances.map((_, index) => index);
  const rand = mulberry32(hyper.seed);
  for (let epoch = 0; epoch < hyper.epochs; epoch++) {
    shuffle(order, rand);
    for (let start = 0; start < order.length; start += hyper.batchSize) {
      const batch = order.slice(start, start + hyper.batchSize);
      const gradient: SparseVector = new Map();
      for (const index of batch) {
        const diff = diffs[index]!;
        const error = sigmoid(dot(weights, diff)) - labels[index]!;
        for (const [slot, value] of diff) {
          gradient.set(slot, (gradient.get(slot) ?? 0) + error * value);
        }
      }
      addScaled(weights, gradient, -hyper.learningRate / batch.length);
    }
  }
}

function trainChoiceHead(
  weights: number[],
  dim: number,
  instances: ChoiceInstance[],
  hyper: Hyperparameters
): void {
  const features: SparseVector[][] = instances.map((inst) =>
    choiceFeatures(inst, dim)
  );
  const order = instances.map((_, index) => index);
  const rand = mulberry32(hyper.seed);
  for (let epoch = 0; epoch < hyper.epochs; epoch++) {
    shuffle(order, rand);
    for (let start = 0; start < order.length; start += hyper.batchSize) {
      const batch = order.slice(start, start + hyper.batchSize);
      const gradient: SparseVector = new Map();
      for (const index of batch) {
        const psis = features[index]!;
        const label = instances[index]!.label!;
        const logits = psis.map((psi) => dot(weights, psi));
        const top = Math.max(...logits);
        const exps = logits.map((value) => Math.exp(value - top));
        const total = exps.reduce((sum, value) => sum + value, 0);
        psis.forEach((psi, j) => {
          const coefficient = exps[j]! / total - (j === label ? 1 : 0);
          for (const [slot, value] of psi) {
            gradient.set(slot, (gradient.get(slot) ?? 0) + coefficient * value);
          }
        });
      }
      addScaled(weights, gradient, -hyper.learningRate / batch.length);
    }
  }
}

export function devAccuracyPair(checkpoint: Checkpoint, instances: PairInstance[]): number {
  let correct = 0;
  for (const inst of instances) {
    if (hardenPair(predictPair(checkpoint, inst)) === inst.label) {
      correct += 1;
    }
  }
  return correct / instances.length;
}

export function devAccuracyChoice(
  checkpoint: Checkpoint,
  instances: ChoiceInstance[]
): number {
  let correct = 0;
  for (const inst of instances) {
    if (hardenChoice(predictChoice(checkpoint, inst)) === inst.label) {
      correct += 1;
    }
  }
  return correct / instances.length;
}

/**
 * Tune the requested head from a base checkpoint and score it on the
 * dev split. The base object is not mutated.
 */
export function finetune(base: Checkpoint, job: FinetuneJob): FinetuneResult {
  checkHyperparameters(job.hyper);
  const checkpoint: Checkpoint = {
    format: base.format,
    dim: base.dim,
    taskA: { w: [...base.taskA.w] },
    taskB: { w: [...base.taskB.w] },
    meta: { ...base.meta },
  };

  let devAccuracy: number;
  let nTrain: number;
  let nDev: number;
  if (job.task === "A") {
    const train = loadTaskA(job.trainData, job.trainAnswers);
    const dev = loadTaskA(job.devData, job.devAnswers);
    requireLabels(train, "training");
    requireLabels(dev, "dev");
    const instances = slice(train, job.limit);
    if (instances.length === 0) {
      throw new Error("training data is empty");
    }
    nTrain = instances.length;
    nDev = dev.instances.length;
    trainPairHead(checkpoint.taskA.w, checkpoint.dim, instances, job.hyper);
    devAccuracy = devAccuracyPair(checkpoint, dev.instances);
  } else {
    const train = loadTaskB(job.trainData, job.trainAnswers);
    const dev = loadTaskB(job.devData, job.devAnswers);
    requireLabels(train, "training");
    requireLabels(dev, "dev");
    const instances = slice(train, job.limit);
    if (instances.length === 0) {
      throw new Error("training data is empty");
    }
    nTrain = instances.length;
    nDev = dev.instances.length;
    trainChoiceHead(checkpoint.taskB.w, checkpoint.dim, instances, job.hyper);
    devAccuracy = devAccuracyChoice(checkpoint, dev.instances);
  }

  checkpoint.meta = {
    ...checkpoint.meta,
    tuned: {
      task: job.task,
      nTrain,
      epochs: job.hyper.epochs,
      batchSize: job.hyper.batchSize,
      learningRate: job.hyper.learningRate,
      seed: job.hyper.seed,
      devAccuracy,
    },
  };
  return { checkpoint, devAccuracy, nTrain, nDev };
}
