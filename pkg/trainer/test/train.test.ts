import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { join } from "node:path";
import { tmpdir } from "node:os";

import { afterAll, describe, expect, it } from "vitest";

import { loadWeights } from "../src/prwt.js";
import { defaultTrainConfig, holdoutMse, loadDataset, train } from "../src/train.js";

const work = mkdtempSync(join(tmpdir(), "train-test-"));
afterAll(() => rmSync(work, { recursive: true, force: true }));

function makeDataset(dir: string, count: number, size: number, seed: number): void {
  const script = [
    "import sys",
    "import numpy as np",
    "from scipy import ndimage",
    "from prforge.image import save_png",
    `rng = np.random.default_rng(${seed})`,
    `for i in range(${count}):`,
    `    base = ndimage.gaussian_filter(rng.uniform(0, 255, (${size}, ${size})), 2.0, mode='mirror')`,
    "    img = np.clip(3.0 * (base - base.mean()) + 128, 0, 255)",
    `    save_png(sys.argv[1] + f"/crop{i:03d}.png", img)`,
  ].join("\n");
  execFileSync("python3", ["-c", script, dir], { encoding: "utf8" });
}

describe("training", () => {
  it("one epoch on a small dataset completes and exports a loadable archive", () => {
    const dir = join(work, "ds1");
    execFileSync("mkdir", ["-p", dir]);
    makeDataset(dir, 10, 16, 1);
    const out = join(work, "smoke.prwt");
    const cfg = defaultTrainConfig(dir, out);
    cfg.epochs = 1;
    cfg.batchSize = 4;
    const res = train(cfg);
    expect(res.stats).toHaveLength(1);
    expect(Number.isFinite(res.stats[0].meanLoss)).toBe(true);
    const loaded = loadWeights(out);
    expect(loaded.lambdas).toHaveLength(cfg.T);
    for (const lam of loaded.lambdas!) expect(lam).toBeGreaterThan(0);
  }, 120_000);

  it("loss decreases over epochs on the fast-mode synthetic task", () => {
    const dir = join(work, "ds2");
    execFileSync("mkdir", ["-p", dir]);
    makeDataset(dir, 16, 16, 2);
    const cfg = defaultTrainConfig(dir, join(work, "decrease.prwt"));
    cfg.epochs = 4;
    cfg.batchSize = 8;
    const res = train(cfg);
    const first = res.stats[0].meanLoss;
    const last = res.stats[res.stats.length - 1].meanLoss;
    expect(last).toBeLessThan(first);
  }, 300_000);

  it("mu2 > 0 trains through the unrolled data-consistency block", () => {
    const dir = join(work, "ds3");
    execFileSync("mkdir", ["-p", dir]);
    makeDataset(dir, 8, 16, 3);
    const cfg = defaultTrainConfig(dir, join(work, "mu2.prwt"));
    cfg.epochs = 2;
    cfg.batchSize = 4;
    cfg.mu2 = 0.5;
    cfg.K = 2;
    cfg.trainLambda = true;
    const res = train(cfg);
    expect(res.stats[1].meanLoss).toBeLessThan(res.stats[0].meanLoss);
    for (const lam of res.lambdas) {
      expect(lam).toBeGreaterThan(0);
      expect(lam).toBeLessThanOrEqual(1);
    }
  }, 300_000);

  it("rejects mu2 > 0 on non-power-of-two crops", () => {
    const dir = join(work, "ds4");
    execFileSync("mkdir", ["-p", dir]);
    makeDataset(dir, 4, 12, 4);
    const cfg = defaultTrainConfig(dir, join(work, "bad.prwt"));
    cfg.mu2 = 0.5;
    expect(() => loadDataset(cfg)).toThrow(/power-of-two/);
  });

  it("holdout split is deterministic and holdoutMse is reproducible", () => {
    const dir = join(work, "ds5");
    execFileSync("mkdir", ["-p", dir]);
    makeDataset(dir, 12, 16, 5);
    const cfg = defaultTrainConfig(dir, join(work, "h.prwt"));
    const a = loadDataset(cfg);
    const b = loadDataset(cfg);
    expect(a.holdout.length).toBe(b.holdout.length);
    expect(holdoutMse(null, a.holdout, 1.0, 9)).toBe(holdoutMse(null, b.holdout, 1.0, 9));
  });
});
