"""Shared synthetic fixtures.

The face builders use only +,-,*,/ and clipping (no transcendentals),
so the generated pixels are bit-identical on every IEEE-754 platform.
That matters for the golden-image tests.
"""

import numpy as np

from morphkit.landmarks import LandmarkSet
from morphkit.raster import Raster

# A face-ish layout of 10 landmarks in a unit square: eye pair, nose,
# mouth corners, chin, brow line and cheeks.
_BASE_LANDMARKS = np.array(
    [
        [0.30, 0.35], [0.70, 0.35],  # eyes
        [0.50, 0.52],                # nose
        [0.35, 0.70], [0.65, 0.70],  # mouth corners
        [0.50, 0.85],                # chin
        [0.30, 0.20], [0.70, 0.20],  # brow
        [0.15, 0.55], [0.85, 0.55],  # cheeks
    ]
)


def gradient_face(seed: int, height: int = 64, width: int = 64) -> Raster:
    """Smooth procedural 'face': overlapping radial and linear gradients."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:height, 0:width].astype(np.float64)
    img = np.zeros((height, width, 3))
    for c in range(3):
        cx = rng.uniform(0.2, 0.8) * width
        cy = rng.uniform(0.2, 0.8) * height
        r2 = ((x - cx) ** 2 + (y - cy) ** 2) / (width * width + height * height)
        gx, gy = rng.uniform(-1.0, 1.0, size=2)
        lin = (gx * x / width + gy * y / height + 2.0) / 4.0
        img[:, :, c] = 0.55 * (1.0 - r2) + 0.45 * lin
    return Raster(np.clip(img, 0.0, 1.0))


def face_landmarks(seed: int, height: int = 64, width: int = 64) -> LandmarkSet:
    """The base layout scaled to the frame with a small per-seed jitter."""
    rng = np.random.default_rng(seed + 1000)
    pts = _BASE_LANDMARKS * np.array([width - 1.0, height - 1.0])
    pts = pts + rng.uniform(-2.0, 2.0, size=pts.shape)
    return LandmarkSet(pts, image_width=width, image_height=height)


def synth_pair(seed: int, height: int = 64, width: int = 64):
    a = gradient_face(seed, height, width)
    la = face_landmarks(seed, height, width)
    b = gradient_face(seed + 500, height, width)
    lb = face_landmarks(seed + 500, height, width)
    return a, la, b, lb
