/**
 * Generate the committed base checkpoint: small seeded random weights
 * for both heads, standing in for a downloaded pretrained model in
 * offline environments. Regenerating with the same seed reproduces the
 * file byte for byte.
 *
 *   node dist/tools/make_base_checkpoint.js checkpoints/base_small.json
 */
import { CHECKPOINT_FORMAT, saveCheckpoint, type Checkpoint } from "../src/model.js";
import { mulberry32 } from "../src/rng.js";

const DIM = 1024;
const SEED = 42;
const SCALE = 0.01;

function head(rand: () => number): number[] {
  return Array.from({ length: DIM }, () => SCALE * (2 * rand() - 1));
}

function main(): void {
  const outPath = process.argv[2];
  if (!outPath) {
    console.error("usage: make_base_checkpoint <out.json>");
    process.exitCode = 1;
    return;
  }
  const rand = mulberry32(SEED);
  const checkpoint: Checkpoint = {
    format: CHECKPOINT_FORMAT,
    dim: DIM,
    taskA: { w: head(rand) },
    taskB: { w: head(rand) },
    meta: { base: "random-init", seed: SEED, scale: SCALE },
  };
  saveCheckpoint(outPath, checkpoint);
  console.log(`wrote base checkpoint (dim ${DIM}) -> ${outPath}`);
}

main();
