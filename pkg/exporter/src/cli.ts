#!/usr/bin/env node
/**
 * comve-export: fine-tune a small checkpoint on ComVE-style CSVs and
 * export soft predictions as interchange JSONL.
 *
 *   comve-export finetune --task A --checkpoint base.json --out tuned.json \
 *       --train-data train.csv --train-answers train_answers.csv \
 *       --dev-data dev.csv --dev-answers dev_answers.csv [--limit 100]
 *   comve-export export --task A --checkpoint tuned.json \
 *       --data test.csv --out preds.jsonl [--model-name NAME]
 */
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import type { Task } from "./csv.js";
import { exportPredictions } from "./export.js";
import { DEFAULT_HYPERPARAMETERS, finetune } from "./finetune.js";
import { loadCheckpoint, saveCheckpoint } from "./model.js";

const taskChoices: ReadonlyArray<Task> = ["A", "B"];

async function run(argv: string[]): Promise<number> {
  await yargs(argv)
    .scriptName("comve-export")
    .command(
      "finetune",
      "tune a head on labeled data and report dev accuracy",
      (cmd) =>
        cmd
          .option("task", { choices: taskChoices, demandOption: true })
          .option("checkpoint", { type: "string", demandOption: true })
          .option("out", { type: "string", demandOption: true })
          .option("train-data", { type: "string", demandOption: true })
          .option("train-answers", { type: "string" })
          .option("dev-data", { type: "string", demandOption: true })
          .option("dev-answers", { type: "string" })
          .option("limit", { type: "number" })
          .option("epochs", {
            type: "number",
            default: DEFAULT_HYPERPARAMETERS.epochs,
          })
          .option("batch-size", {
            type: "number",
            default: DEFAULT_HYPERPARAMETERS.batchSize,
          })
          .option("learning-rate", {
            type: "number",
            default: DEFAULT_HYPERPARAMETERS.learningRate,
          })
          .option("seed", {
            type: "number",
            default: DEFAULT_HYPERPARAMETERS.seed,
          }),
      (args) => {
        const base = loadCheckpoint(args.checkpoint);
        const result = finetune(base, {
          task: args.task,
          trainData: args["train-data"],
          trainAnswers: args["train-answers"],
          devData: args["dev-data"],
          devAnswers: args["dev-answers"],
          limit: args.limit,
          hyper: {
            epochs: args.epochs,
            batchSize: args["batch-size"],
            learningRate: args["learning-rate"],
            seed: args.seed,
          },
        });
        saveCheckpoint(args.out, result.checkpoint);
        console.log(
          `tuned task ${args.task} head on ${result.nTrain} instances -> ${args.out}`
        );
        // the headline number doubles as the member's ensemble weight
        console.log(`dev accuracy ${result.devAccuracy.toFixed(4)}`);
      }
    )
    .command(
      "export",
      "write soft predictions for a dataset as JSONL",
      (cmd) =>
        cmd
          .option("task", { choices: taskChoices, demandOption: true })
          .option("checkpoint", { type: "string", demandOption: true })
          .option("data", { type: "string", demandOption: true })
          .option("out", { type: "string", demandOption: true })
          .option("model-name", { type: "string", default: "hash-ff" }),
      (args) => {
        const checkpoint = loadCheckpoint(args.checkpoint);
        const count = exportPredictions(
          checkpoint,
          args.task,
          args.data,
          args.out,
          args["model-name"]
        );
        console.log(`wrote ${count} predictions -> ${args.out}`);
      }
    )
    .demandCommand(1, "pick a subcommand: finetune or export")
    .strict()
    .fail((message, error) => {
      throw error ?? new Error(message);
    })
    .parseAsync();
  return 0;
}

run(hideBin(process.argv))
  .then((code) => {
    process.exitCode = code;
  })
  .catch((error: unknown) => {
    console.error(`error: ${error instanceof Error ? error.message : String(error)}`);
    process.exitCode = 1;
  });
