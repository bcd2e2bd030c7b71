/**
 * Trainer entry point.
 *
 *   node dist/cli.js --dataset crops/ --out model.prwt [--epochs 12]
 *     [--batch 8] [--lr 3e-4] [--mu1 1] [--mu2 0] [--T 18] [--K 5]
 *     [--alpha 3] [--seed 0] [--mode fast|pipeline] [--engine prforge]
 *     [--train-lambda] [--log run.json]
 */

import { defaultTrainConfig, train } from "./train.js";

function parseArgs(argv: string[]): Record<string, string | boolean> {
  const out: Record<string, string | boolean> = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument ${arg}`);
    const key = arg.slice(2);
    if (key === "train-lambda") {
      out[key] = true;
    } else {
      const val = argv[++i];
      if (val === undefined) throw new Error(`missing value for --${key}`);
      out[key] = val;
    }
  }
  return out;
}

function main(): number {
  let args: Record<string, string | boolean>;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  const dataset = args["dataset"] as string | undefined;
  const out = args["out"] as string | undefined;
  if (!dataset || !out) {
    console.error("error: --dataset and --out are required");
    return 2;
  }
  const cfg = defaultTrainConfig(dataset, out);
  if (args["epochs"]) cfg.epochs = Number(args["epochs"]);
  if (args["batch"]) cfg.batchSize = Number(args["batch"]);
  if (args["lr"]) cfg.lr = Number(args["lr"]);
  if (args["mu1"]) cfg.mu1 = Number(args["mu1"]);
  if (args["mu2"]) cfg.mu2 = Number(args["mu2"]);
  if (args["T"]) cfg.T = Number(args["T"]);
  if (args["K"]) cfg.K = Number(args["K"]);
  if (args["alpha"]) cfg.alpha = Number(args["alpha"]);
  if (args["seed"]) cfg.seed = Number(args["seed"]);
  if (args["mode"]) cfg.mode = args["mode"] as "fast" | "pipeline";
  if (args["engine"]) cfg.engine = (args["engine"] as string).split(" ");
  if (args["train-lambda"]) cfg.trainLambda = true;
  if (args["log"]) cfg.logPath = args["log"] as string;

  try {
    const result = train(cfg);
    const first = result.stats[0]?.meanLoss ?? NaN;
    const last = result.stats[result.stats.length - 1]?.meanLoss ?? NaN;
    console.log(`trained ${cfg.epochs} epochs: loss ${first.toFixed(4)} -> ${last.toFixed(4)}`);
    console.log(`holdout MSE at mid-schedule sigma: identity ${result.holdoutIdentityMse.toFixed(4)}, ` +
                `model ${result.holdoutModelMse.toFixed(4)}`);
    console.log(`weights written to ${cfg.exportPath}`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

process.exit(main());
