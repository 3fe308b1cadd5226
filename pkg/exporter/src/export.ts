/**
 * Soft-prediction export in the interchange JSONL format: one object
 * per instance with keys id, task, probs and model. Task A emits a
 * single probability (sentence 1 being the invalid one); task B emits
 * the 3-way softmax, never hardened labels.
 */
import { writeFileSync } from "node:fs";

import { loadTaskA, loadTaskB, type Task } from "./csv.js";
import { Checkpoint, predictChoice, predictPair } from "./model.js";

export interface PredictionLine {
  id: number;
  task: Task;
  probs: number[];
  model: string;
}

export function predictDataset(
  checkpoint: Checkpoint,
  task: Task,
  dataPath: string,
  modelName: string
): PredictionLine[] {
  if (task === "A") {
    return loadTaskA(dataPath).instances.map((inst) => ({
      id: inst.id,
      task,
      probs: [predictPair(checkpoint, inst)],
      model: modelName,
    }));
  }
  return loadTaskB(dataPath).instances.map((inst) => ({
    id: inst.id,
    task,
    probs: predictChoice(checkpoint, inst),
    model: modelName,
  }));
}

export function toJsonl(lines: PredictionLine[]): string {
  return lines.map((line) => JSON.stringify(line)).join("\n") + "\n";
}

export function exportPredictions(
  checkpoint: Checkpoint,
  task: Task,
  dataPath: string,
  outPath: string,
  modelName: string
): number {
  const lines = predictDataset(checkpoint, task, dataPath, modelName);
  if (lines.length === 0) {
    throw new Error(`${dataPath}: no instances to export`);
  }
  writeFileSync(outPath, toJsonl(lines), "utf-8");
  return lines.length;
}
