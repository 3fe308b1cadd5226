import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { beforeAll, describe, expect, it } from "vitest";

import {
  DEFAULT_HYPERPARAMETERS,
  FinetuneJob,
  finetune,
} from "../src/finetune.js";
import { CHECKPOINT_FORMAT, Checkpoint } from "../src/model.js";
import { mulberry32 } from "../src/rng.js";

const DIM = 512;

function makeCheckpoint(seed: number): Checkpoint {
  const rand = mulberry32(seed);
  const head = () => Array.from({ length: DIM }, () => 0.01 * (2 * rand() - 1));
  return {
    format: CHECKPOINT_FORMAT,
    dim: DIM,
    taskA: { w: head() },
    taskB: { w: head() },
    meta: {},
  };
}

/**
 * A linearly separable toy: the invalid sentence always carries the
 * marker token, alternating between the two slots.
 */
function toyPairCsvs(n: number): { data: string; answers: string } {
  const data = ["id,sent0,sent1"];
  const answers: string[] = [];
  for (let i = 0; i < n; i++) {
    const good = `the tree number ${i} grows tall`;
    const bad = `the tree number ${i} grows zzz`;
    if (i % 2 === 0) {
      data.push(`${i},${good},${bad}`);
      answers.push(`${i},1`);
    } else {
      data.push(`${i},${bad},${good}`);
      answers.push(`${i},0`);
    }
  }
  return { data: data.join("\n") + "\n", answers: answers.join("\n") + "\n" };
}

function toyChoiceCsvs(n: number): { data: string; answers: string } {
  const data = ["id,FalseSent,OptionA,OptionB,OptionC"];
  const answers: string[] = [];
  const letters = ["A", "B", "C"];
  for (let i = 0; i < n; i++) {
    const options = ["filler words here", "filler words there", "filler words now"];
    const winner = i % 3;
    options[winner] = `marker reason ${winner}`;
    data.push(`${i},odd statement ${i},${options[0]},${options[1]},${options[2]}`);
    answers.push(`${i},${letters[winner]}`);
  }
  return { data: data.join("\n") + "\n", answers: answers.join("\n") + "\n" };
}

describe("finetune", () => {
  let dir: string;
  let jobA: FinetuneJob;

  beforeAll(() => {
    dir = mkdtempSync(join(tmpdir(), "exporter-tune-"));
    const train = toyPairCsvs(24);
    const dev = toyPairCsvs(10);
    writeFileSync(join(dir, "a_train.csv"), train.data);
    writeFileSync(join(dir, "a_train_answers.csv"), train.answers);
    writeFileSync(join(dir, "a_dev.csv"), dev.data);
    writeFileSync(join(dir, "a_dev_answers.csv"), dev.answers);
    const trainB = toyChoiceCsvs(18);
    const devB = toyChoiceCsvs(9);
    writeFileSync(join(dir, "b_train.csv"), trainB.data);
    writeFileSync(join(dir, "b_train_answers.csv"), trainB.answers);
    writeFileSync(join(dir, "b_dev.csv"), devB.data);
    writeFileSync(join(dir, "b_dev_answers.csv"), devB.answers);
    jobA = {
      task: "A",
      trainData: join(dir, "a_train.csv"),
      trainAnswers: join(dir, "a_train_answers.csv"),
      devData: join(dir, "a_dev.csv"),
      devAnswers: join(dir, "a_dev_answers.csv"),
      hyper: DEFAULT_HYPERPARAMETERS,
    };
  });

  it("solves a separable pair task", () => {
    const result = finetune(makeCheckpoint(1), jobA);
    expect(result.nTrain).toBe(24);
    expect(result.nDev).toBe(10);
    expect(result.devAccuracy).toBe(1);
  });

  it("solves a separable choice task", () => {
    const result = finetune(makeCheckpoint(1), {
      task: "B",
      trainData: join(dir, "b_train.csv"),
      trainAnswers: join(dir, "b_train_answers.csv"),
      devData: join(dir, "b_dev.csv"),
      devAnswers: join(dir, "b_dev_answers.csv"),
      hyper: DEFAULT_HYPERPARAMETERS,
    });
    expect(result.devAccuracy).toBe(1);
  });

  it("is reproducible for a fixed seed", () => {
    const first = finetune(makeCheckpoint(1), jobA);
    const second = finetune(makeCheckpoint(1), jobA);
    expect(second.devAccuracy).toBe(first.devAccuracy);
    expect(second.checkpoint.taskA.w).toEqual(first.checkpoint.taskA.w);
  });

  it("does not mutate the base checkpoint", () => {
    const base = makeCheckpoint(1);
    const before = [...base.taskA.w];
    finetune(base, jobA);
    expect(base.taskA.w).toEqual(before);
  });

  it("leaves the other head untouched", () => {
    const base = makeCheckpoint(1);
    const result = finetune(base, jobA);
    expect(result.checkpoint.taskB.w).toEqual(base.taskB.w);
  });

  it("records tuning metadata", () => {
    const result = finetune(makeCheckpoint(1), { ...jobA, limit: 6 });
    const tuned = result.checkpoint.meta["tuned"] as Record<string, unknown>;
    expect(tuned["task"]).toBe("A");
    expect(tuned["nTrain"]).toBe(6);
    expect(tuned["seed"]).toBe(DEFAULT_HYPERPARAMETERS.seed);
  });

  it("caps training at the limit", () => {
    const result = finetune(makeCheckpoint(1), { ...jobA, limit: 4 });
    expect(result.nTrain).toBe(4);
  });

  it("accepts a limit beyond the data size", () => {
    const result = finetune(makeCheckpoint(1), { ...jobA, limit: 10_000 });
    expect(result.nTrain).toBe(24);
  });

  it("rejects unlabeled training data", () => {
    expect(() =>
      finetune(makeCheckpoint(1), { ...jobA, trainAnswers: undefined }),
    ).toThrow(/unlabeled/);
  });

  it("rejects unlabeled dev data", () => {
    expect(() =>
      finetune(makeCheckpoint(1), { ...jobA, devAnswers: undefined }),
    ).toThrow(/unlabeled/);
  });

  it("rejects bad hyperparameters", () => {
    const cases: Array<Partial<typeof DEFAULT_HYPERPARAMETERS>> = [
      { epochs: 0 },
      { epochs: 1.5 },
      { batchSize: -2 },
      { learningRate: 0 },
      { learningRate: Number.NaN },
      { seed: 0.5 },
    ];
    for (const patch of cases) {
      const hyper = { ...DEFAULT_HYPERPARAMETERS, ...patch };
      expect(() => finetune(makeCheckpoint(1), { ...jobA, hyper })).toThrow();
    }
  });

  it("rejects a non-positive limit", () => {
    expect(() => finetune(makeCheckpoint(1), { ...jobA, limit: 0 })).toThrow(
      /positive integer/,
    );
  });
});
