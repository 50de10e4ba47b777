"""Procedural stand-ins for face photos, shared by the demo scripts.

Real face data is licensed, so the demos run on smooth synthetic
images: overlapping gradients for the "skin" and a fixed face-like
landmark layout with per-seed jitter.  Everything is deterministic in
the seed.
"""

import numpy as np

from morphkit.landmarks import LandmarkSet
from morphkit.raster import Raster

_LAYOUT = np.array(
    [
        [0.30, 0.35], [0.70, 0.35],  # eyes
        [0.50, 0.52],                # nose tip
        [0.35, 0.70], [0.65, 0.70],  # mouth corners
        [0.50, 0.85],                # chin
        [0.30, 0.20], [0.70, 0.20],  # brow
        [0.15, 0.55], [0.85, 0.55],  # cheeks
    ]
)


def synth_face(seed: int, size: int = 96) -> Raster:
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    img = np.zeros((size, size, 3))
    for c in range(3):
        cx, cy = rng.uniform(0.2, 0.8, size=2) * size
        r2 = ((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * size * size)
        gx, gy = rng.uniform(-1.0, 1.0, size=2)
        lin = (gx * x / size + gy * y / size + 2.0) / 4.0
        img[:, :, c] = 0.55 * (1.0 - r2) + 0.45 * lin
    return Raster(np.clip(img, 0.0, 1.0))


def synth_landmarks(seed: int, size: int = 96) -> LandmarkSet:
    rng = np.random.default_rng(seed + 1000)
    pts = _LAYOUT * (size - 1.0) + rng.uniform(-3.0, 3.0, size=_LAYOUT.shape)
    return LandmarkSet(pts, image_width=size, image_height=size)


def recapture(face: Raster, seed: int, noise: float = 0.015) -> Raster:
    """The same face on a different day: mild noise and exposure shift."""
    rng = np.random.default_rng(seed + 9000)
    shifted = face.data * rng.uniform(0.95, 1.05) + rng.normal(0.0, noise, face.data.shape)
    return Raster(np.clip(shifted, 0.0, 1.0))
