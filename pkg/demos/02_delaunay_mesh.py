#!/usr/bin/env python3
"""Visualize the triangulation that drives the piecewise-affine warp.

Triangulates a jittered face landmark layout plus the image-border
augmentation points, draws the mesh over the face at 8x scale, and
prints a few mesh statistics.  Output: demos/out/mesh/mesh.png.
"""

from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from _synth import synth_face, synth_landmarks
from morphkit.landmarks import augment_border_points
from morphkit.triangulation import delaunay

OUT = Path(__file__).resolve().parent / "out" / "mesh"
SCALE = 8


def triangle_angles(pts: np.ndarray) -> np.ndarray:
    angles = []
    for i in range(3):
        a, b, c = pts[i], pts[(i + 1) % 3], pts[(i + 2) % 3]
        u, v = b - a, c - a
        cosang = np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
        angles.append(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))))
    return np.array(angles)


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    face = synth_face(11)
    lm = synth_landmarks(11)
    la, _ = augment_border_points(lm, lm, face.width, face.height)
    mesh = delaunay(la.points)

    base = Image.fromarray(face.quantized()).resize(
        (face.width * SCALE, face.height * SCALE), Image.NEAREST)
    draw = ImageDraw.Draw(base)
    for tri in mesh.triangles:
        corners = [tuple(la.points[i] * SCALE) for i in tri]
        draw.polygon(corners, outline=(255, 255, 0))
    for x, y in la.points:
        draw.ellipse([x * SCALE - 3, y * SCALE - 3, x * SCALE + 3, y * SCALE + 3],
                     fill=(255, 0, 0))
    base.save(OUT / "mesh.png")

    min_angles = [triangle_angles(la.points[list(tri)]).min() for tri in mesh.triangles]
    print(f"{len(la.points)} points -> {len(mesh.triangles)} triangles")
    print(f"smallest interior angle: {min(min_angles):.1f} deg "
          f"(Delaunay maximizes this over all triangulations)")
    print("mesh image:", OUT / "mesh.png")


if __name__ == "__main__":
    main()
