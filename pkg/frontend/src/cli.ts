import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { loadDataset } from "./loader.js";
import { DEFAULT_TRAIN, splitDataset, trainEval } from "./train.js";
import { FEATURE_MODES, type FeatureMode } from "./types.js";

export async function run(argv: string[]): Promise<void> {
  await yargs(argv)
    .scriptName("gdl-harness")
    .command(
      "train",
      "Train a graph classifier on an exported dataset and print test accuracy",
      (args) =>
        args
          .option("data", { type: "string", demandOption: true, describe: "Training JSONL file" })
          .option("test-data", {
            type: "string",
            describe: "Test JSONL file; omit to split --data",
          })
          .option("split", {
            type: "number",
            default: 0.8,
            describe: "Train fraction when --test-data is omitted",
          })
          .option("features", {
            choices: FEATURE_MODES,
            default: DEFAULT_TRAIN.featureMode,
          })
          .option("seed", { type: "number", default: DEFAULT_TRAIN.seed })
          .option("epochs", { type: "number", default: DEFAULT_TRAIN.epochs })
          .option("batch-size", { type: "number", default: DEFAULT_TRAIN.batchSize })
          .option("learning-rate", { type: "number", default: DEFAULT_TRAIN.learningRate }),
      async (args) => {
        const data = loadDataset(args.data);
        let train = data;
        let test: typeof data;
        if (args.testData) {
          test = loadDataset(args.testData);
        } else {
          ({ train, test } = splitDataset(data, args.split, args.seed));
        }
        const result = await trainEval(train, test, {
          featureMode: args.features as FeatureMode,
          seed: args.seed,
          epochs: args.epochs,
          batchSize: args.batchSize,
          learningRate: args.learningRate,
        });
        // single machine-readable result line
        console.log(JSON.stringify(result));
      },
    )
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      console.error(`error: ${msg ?? err?.message}`);
      process.exit(1);
    })
    .parseAsync();
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  run(hideBin(process.argv)).catch((err: Error) => {
    console.error(`error: ${err.message}`);
    process.exit(1);
  });
}
