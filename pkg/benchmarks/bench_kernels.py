#!/usr/bin/env python3
"""Time the jitted conv kernel against the pure-numpy fallback.

Runs the full residual-CNN forward pass under both backends (fresh
subprocess per backend so the import-time selection applies) and prints a
small table. Usage: python benchmarks/bench_kernels.py [--size 64]
[--repeats 20].
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, sys, time
import numpy as np
from prforge import _kernels
from prforge.denoise import cnn_forward
from prforge.weights import CNN_ARCH, WeightsArchive

size, repeats = int(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(0)
tensors = {name: rng.normal(0, 0.05, shape).astype(np.float32) for name, shape, _ in CNN_ARCH}
arch = WeightsArchive(tensors=tensors)
x2 = rng.uniform(0, 255, (2, size, size))
cnn_forward(arch, x2)  # warm up (jit compile on the numba path)
t0 = time.perf_counter()
for _ in range(repeats):
    out = cnn_forward(arch, x2)
elapsed = (time.perf_counter() - t0) / repeats
print(json.dumps({"backend": _kernels.BACKEND, "seconds": elapsed, "checksum": float(out.sum())}))
"""


def run(backend: str, size: int, repeats: int) -> dict:
    env = dict(os.environ, PRFORGE_BACKEND=backend)
    proc = subprocess.run([sys.executable, "-c", _WORKER, str(size), str(repeats)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    results = [run(b, args.size, args.repeats) for b in ("numpy", "numba")]
    print(f"residual-CNN forward, {args.size}x{args.size} input, "
          f"mean of {args.repeats} runs after warmup:")
    for r in results:
        print(f"  {r['backend']:>6}: {r['seconds'] * 1e3:8.2f} ms")
    ratio = results[0]["seconds"] / results[1]["seconds"]
    print(f"  speedup (numba vs numpy): {ratio:.2f}x")
    drift = abs(results[0]["checksum"] - results[1]["checksum"])
    print(f"  checksum agreement: |delta| = {drift:.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
