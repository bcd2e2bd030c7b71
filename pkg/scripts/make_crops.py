#!/usr/bin/env python3
"""Cut deterministic grayscale crops from scikit-image's bundled photos.

Usage: python scripts/make_crops.py OUTDIR [--count 240] [--size 24] [--seed 0]

The crops feed denoiser training and the desk-scale benchmarks; offsets
are drawn from a seeded generator so the same arguments always produce
the same files.
"""

import argparse
from pathlib import Path

import numpy as np
import skimage.data as skd
from PIL import Image

from prforge.image import save_png

SOURCES = ("camera", "coins", "moon", "text", "page", "clock", "brick", "cell")


def save_png16(path, img):
    """16-bit grayscale PNG; values in [0, 255] map to the full 16-bit range."""
    data = np.clip(np.asarray(img, dtype=np.float64), 0.0, 255.0)
    u16 = np.rint(data * 257.0).astype(np.uint16)
    im = Image.new("I;16", (u16.shape[1], u16.shape[0]))
    im.putdata([int(v) for v in u16.ravel()])
    im.save(Path(path), format="PNG")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("outdir")
    parser.add_argument("--count", type=int, default=240)
    parser.add_argument("--size", type=int, default=24)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--min-std", type=float, default=8.0,
                        help="skip near-flat crops below this pixel std")
    parser.add_argument("--downscale", type=int, default=1,
                        help="average-pool source regions by this factor (kills sensor grain)")
    parser.add_argument("--depth", type=int, choices=(8, 16), default=8,
                        help="PNG bit depth; 16 avoids re-quantizing smooth crops")
    args = parser.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    images = {name: getattr(skd, name)().astype(np.float64) for name in SOURCES}
    rng = np.random.default_rng(args.seed)
    written = 0
    attempts = 0
    while written < args.count and attempts < 50 * args.count:
        attempts += 1
        name = SOURCES[rng.integers(0, len(SOURCES))]
        img = images[name]
        span = args.size * args.downscale
        if img.shape[0] < span or img.shape[1] < span:
            continue
        r = int(rng.integers(0, img.shape[0] - span))
        c = int(rng.integers(0, img.shape[1] - span))
        region = img[r : r + span, c : c + span]
        if args.downscale > 1:
            crop = region.reshape(args.size, args.downscale, args.size, args.downscale).mean(axis=(1, 3))
        else:
            crop = region
        if crop.std() < args.min_std:
            continue
        if args.depth == 16:
            save_png16(outdir / f"{name}_{r:04d}_{c:04d}.png", crop)
        else:
            save_png(outdir / f"{name}_{r:04d}_{c:04d}.png", crop)
        written += 1
    print(f"wrote {written} {args.size}x{args.size} crops to {outdir}")
    return 0 if written == args.count else 1


if __name__ == "__main__":
    raise SystemExit(main())
