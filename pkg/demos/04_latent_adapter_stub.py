#!/usr/bin/env python3
"""Latent-space morphing through an external generator process.

Launches the bundled toy generator (demos/toy_generator.py) over the
line-JSON protocol, projects two ramp images into its latent space,
interpolates, and synthesizes the in-betweens.  The same calls drive a
real GAN adapter; only the subprocess command changes.

Output: demos/out/latent/ (sources, interpolation strip, cache).
"""

import sys
from pathlib import Path

import numpy as np

from morphkit.adapters import LineJsonAdapter
from morphkit.latent import lerp_latent, project, synthesize
from morphkit.raster import Raster, save_image

HERE = Path(__file__).resolve().parent
OUT = HERE / "out" / "latent"


def ramp_image(seed: int, size: int = 64) -> Raster:
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    xn, yn = 2.0 * x / (size - 1.0) - 1.0, 2.0 * y / (size - 1.0) - 1.0
    img = np.empty((size, size, 3))
    for c in range(3):
        gx, gy = rng.uniform(-0.45, 0.45, size=2)
        img[:, :, c] = 0.5 + gx * xn + gy * yn
    return Raster(np.clip(img, 0.0, 1.0))


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    cache = OUT / "cache"
    save_image(ramp_image(1), OUT / "source_a.png")
    save_image(ramp_image(2), OUT / "source_b.png")

    command = [sys.executable, str(HERE / "toy_generator.py"), "--size", "64"]
    with LineJsonAdapter(command) as adapter:
        wa = project(adapter, OUT / "source_a.png", steps=100, cache_dir=cache)
        wb = project(adapter, OUT / "source_b.png", steps=100, cache_dir=cache)
        print(f"projected into {wa.space_tag!r}, {wa.dimension} dims")
        for alpha in (0.0, 0.25, 0.5, 0.75, 1.0):
            w = lerp_latent(wa, wb, alpha)
            out = OUT / f"latent_{int(alpha * 100):03d}.png"
            synthesize(adapter, w, out)
            print(f"alpha={alpha:4.2f} -> {out.name}")
        # second projection hits the cache: no adapter roundtrip
        wa_again = project(adapter, OUT / "source_a.png", steps=100, cache_dir=cache)
        assert np.array_equal(wa.values, wa_again.values)
    print("cached responses in", cache)


if __name__ == "__main__":
    main()
