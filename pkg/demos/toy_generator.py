#!/usr/bin/env python3
"""A miniature generator speaking the line-JSON adapter protocol.

The "generator" maps a 6-dim latent to an image whose three channels
are linear ramps: channel c = 0.5 + 0.5*(w[2c]*xn + w[2c+1]*yn) with
xn, yn in [-1, 1].  "project" recovers the latent from an image by
least squares against those same ramps, so project(synthesize(w))
roundtrips up to 8-bit quantization.  Good enough to demonstrate the
protocol and latent-space interpolation without a real model.

One JSON object per stdin line, one per stdout line; errors are
reported in-band ({"error": ...}) and never kill the process.
"""

import argparse
import json
import sys

import numpy as np
from PIL import Image


def ramps(size: int):
    y, x = np.mgrid[0:size, 0:size]
    xn = 2.0 * x / (size - 1.0) - 1.0
    yn = 2.0 * y / (size - 1.0) - 1.0
    return xn, yn


def synthesize(latent, size: int) -> np.ndarray:
    w = np.asarray(latent, dtype=np.float64)
    if w.shape != (6,):
        raise ValueError(f"latent must have 6 components, got {w.shape}")
    xn, yn = ramps(size)
    img = np.empty((size, size, 3))
    for c in range(3):
        img[:, :, c] = 0.5 + 0.5 * (w[2 * c] * xn + w[2 * c + 1] * yn)
    return np.clip(img, 0.0, 1.0)


def project(path: str) -> list:
    img = np.asarray(Image.open(path).convert("RGB"), dtype=np.float64) / 255.0
    size = img.shape[0]
    xn, yn = ramps(size)
    design = np.column_stack([xn.ravel(), yn.ravel()])
    latent = []
    for c in range(3):
        target = 2.0 * img[:, :, c].ravel() - 1.0
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        latent.extend(float(v) for v in coef)
    return latent


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--size", type=int, default=64)
    args = parser.parse_args()

    for line in sys.stdin:
        try:
            req = json.loads(line)
            op = req.get("op")
            if op == "project":
                resp = {"latent": project(req["image"]), "space": "toy-W"}
            elif op == "synthesize":
                img = synthesize(req["latent"], args.size)
                data = np.clip(img * 255.0 + 0.5, 0.0, 255.0).astype(np.uint8)
                Image.fromarray(data).save(req["out"], format="PNG")
                resp = {"ok": True, "width": args.size, "height": args.size}
            else:
                resp = {"error": f"unknown op {op!r}"}
        except Exception as exc:  # keep serving whatever happens
            resp = {"error": str(exc)}
        print(json.dumps(resp))
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
