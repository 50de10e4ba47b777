"""Landmark-based face morphing: per-triangle affine warps plus blending.

The pipeline morphs a pair by averaging the two landmark shapes,
triangulating the mean shape, inverse-warping both sources onto it, and
alpha-blending inside the landmark hull.  Pixels outside the hull are
the plain pixelwise average of the unwarped sources.

Everything on this path is explicit IEEE arithmetic (no LAPACK solves),
so outputs are reproducible bit for bit across platforms, and swapping
the operands while complementing alpha is an exact no-op.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GeometryError
from .landmarks import LandmarkSet, augment_border_points, weighted_mean_landmarks
from .raster import Raster, sample_bilinear_many, save_image
from .triangulation import EPS, TriangleMesh, delaunay
from .util import alpha_weights


@dataclass(frozen=True)
class MorphConfig:
    """Blend weight and output policy for a morph run."""

    alpha: float = 0.5
    border_augmentation: bool = False
    tool_name: str = "landmark"
    output_dir: Path | None = None

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha!r}")


def affine_from_triangles(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """2x3 matrix mapping destination coordinates to source coordinates.

    Applying the matrix to the dst vertices reproduces the src vertices
    (inverse warping).  Solved in closed form so results do not depend
    on the linear-algebra backend.
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != (3, 2) or dst.shape != (3, 2):
        raise GeometryError("affine_from_triangles expects two (3, 2) triangles")
    (x0, y0), (x1, y1), (x2, y2) = dst
    det = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
    scale = abs((x1 - x0) * (y2 - y0)) + abs((y1 - y0) * (x2 - x0))
    if abs(det) <= EPS * scale or det == 0.0:
        raise GeometryError("degenerate destination triangle")
    s_det = (src[1, 0] - src[0, 0]) * (src[2, 1] - src[0, 1]) - (
        src[1, 1] - src[0, 1]
    ) * (src[2, 0] - src[0, 0])
    s_scale = abs((src[1, 0] - src[0, 0]) * (src[2, 1] - src[0, 1])) + abs(
        (src[1, 1] - src[0, 1]) * (src[2, 0] - src[0, 0])
    )
    if abs(s_det) <= EPS * s_scale or s_det == 0.0:
        raise GeometryError("degenerate source triangle")

    out = np.empty((2, 3), dtype=np.float64)
    # Cramer's rule on [xd yd 1] m = src-coordinate, one row per axis.
    for axis in range(2):
        b0, b1, b2 = src[0, axis], src[1, axis], src[2, axis]
        ma = (b1 - b0) * (y2 - y0) - (y1 - y0) * (b2 - b0)
        mb = (x1 - x0) * (b2 - b0) - (b1 - b0) * (x2 - x0)
        out[axis, 0] = ma / det
        out[axis, 1] = mb / det
        out[axis, 2] = b0 - out[axis, 0] * x0 - out[axis, 1] * y0
    return out


def warp_piecewise(
    src: Raster,
    src_lm: LandmarkSet,
    dst_lm: LandmarkSet,
    mesh: TriangleMesh,
) -> tuple[Raster, np.ndarray]:
    """Warp src so its landmarks land on dst_lm, triangle by triangle.

    Every pixel center inside the hull of dst_lm is mapped through the
    affine of its containing triangle (ties go to the lowest triangle
    index, matching locate) and bilinearly sampled from src.  Returns
    the warped raster and a boolean coverage mask; uncovered pixels are
    zero in the raster and False in the mask.
    """
    if src_lm.count != dst_lm.count:
        raise ValueError(
            f"landmark counts differ: {src_lm.count} vs {dst_lm.count}"
        )
    if mesh.n_vertices != dst_lm.count:
        raise ValueError("mesh was not built over dst_lm")
    h, w = src.height, src.width
    out = np.zeros((h, w, 3), dtype=np.float64)
    mask = np.zeros((h, w), dtype=bool)
    spts = src_lm.points
    dpts = dst_lm.points

    for tri in mesh.triangles:
        d = dpts[list(tri)]
        s = spts[list(tri)]
        x_lo = max(0, int(np.ceil(d[:, 0].min() - EPS)))
        x_hi = min(w - 1, int(np.floor(d[:, 0].max() + EPS)))
        y_lo = max(0, int(np.ceil(d[:, 1].min() - EPS)))
        y_hi = min(h - 1, int(np.floor(d[:, 1].max() + EPS)))
        if x_lo > x_hi or y_lo > y_hi:
            continue
        ys, xs = np.mgrid[y_lo : y_hi + 1, x_lo : x_hi + 1]
        px = xs.astype(np.float64)
        py = ys.astype(np.float64)
        (ax, ay), (bx, by), (cx, cy) = d
        det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        l1 = ((px - ax) * (cy - ay) - (py - ay) * (cx - ax)) / det
        l2 = ((bx - ax) * (py - ay) - (by - ay) * (px - ax)) / det
        l0 = 1.0 - l1 - l2
        claim = (
            (l0 >= -EPS)
            & (l1 >= -EPS)
            & (l2 >= -EPS)
            & ~mask[y_lo : y_hi + 1, x_lo : x_hi + 1]
        )
        if not claim.any():
            continue
        m = affine_from_triangles(s, d)
        gx = px[claim]
        gy = py[claim]
        sx = m[0, 0] * gx + m[0, 1] * gy + m[0, 2]
        sy = m[1, 0] * gx + m[1, 1] * gy + m[1, 2]
        values = sample_bilinear_many(src, sx, sy)
        yy = ys[claim]
        xx = xs[claim]
        out[yy, xx] = values
        mask[yy, xx] = True
    return Raster(out), mask


def morph_pair(
    a: Raster,
    la: LandmarkSet,
    b: Raster,
    lb: LandmarkSet,
    cfg: MorphConfig,
) -> Raster:
    """Morph two sources into one image at the configured alpha.

    Geometry and pixels share the blend weight: the mean shape is
    alpha-weighted the same way as the colors.  Inside the landmark
    hull both warped sources are blended; outside, the unwarped sources
    are averaged with the same weights.
    """
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError(
            f"source dimensions differ: {(a.width, a.height)} vs {(b.width, b.height)}"
        )
    if la.count != lb.count:
        raise ValueError(f"landmark counts differ: {la.count} vs {lb.count}")

    mean_lm = weighted_mean_landmarks(la, lb, cfg.alpha)
    if cfg.border_augmentation:
        la, lb = augment_border_points(la, lb, a.width, a.height)
        # The same border rows are appended verbatim to the mean shape:
        # blending identical points would only add rounding noise.
        border = la.points[mean_lm.count :]
        mean_lm = LandmarkSet(
            np.vstack([mean_lm.points, border]),
            mean_lm.image_width,
            mean_lm.image_height,
        )
    mesh = delaunay(mean_lm.points)
    warped_a, mask = warp_piecewise(a, la, mean_lm, mesh)
    warped_b, _ = warp_piecewise(b, lb, mean_lm, mesh)

    wa, wb = alpha_weights(cfg.alpha)
    interior = wa * warped_a.data + wb * warped_b.data
    exterior = wa * a.data + wb * b.data
    return Raster(np.where(mask[..., None], interior, exterior))


MANIFEST_HEADER = ["index", "subject_a", "subject_b", "status", "output_path"]


@dataclass(frozen=True)
class MorphResult:
    index: int
    subject_a: str
    subject_b: str
    status: str
    output_path: str


def morph_output_name(tool_name: str, sample_a: str, sample_b: str) -> str:
    return f"{tool_name}_{Path(sample_a).stem}_{Path(sample_b).stem}.png"


def generate_set(
    pairs,
    cfg: MorphConfig,
    landmark_source,
    image_source,
    workers: int = 1,
) -> list[MorphResult]:
    """Morph every protocol pair, tolerating per-pair failures.

    landmark_source(sample_id) -> LandmarkSet and
    image_source(sample_id) -> Raster resolve inputs; exceptions from
    either mark that pair failed without stopping the run.  Results
    come back in protocol order no matter how workers interleave.
    """
    if cfg.output_dir is None:
        raise ValueError("generate_set needs cfg.output_dir")
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def run_one(item) -> MorphResult:
        index, row = item
        name = morph_output_name(cfg.tool_name, row.sample_a, row.sample_b)
        target = out_dir / name
        try:
            img_a = image_source(row.sample_a)
            img_b = image_source(row.sample_b)
            lm_a = landmark_source(row.sample_a)
            lm_b = landmark_source(row.sample_b)
            morphed = morph_pair(img_a, lm_a, img_b, lm_b, cfg)
            save_image(morphed, target)
        except Exception as exc:  # per-pair failures must not kill the batch
            return MorphResult(index, row.subject_a, row.subject_b, f"error: {exc}", "")
        return MorphResult(index, row.subject_a, row.subject_b, "ok", str(target))

    items = list(enumerate(pairs.rows))
    if workers <= 1:
        results = [run_one(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, items))
    return results


def write_manifest(results: list[MorphResult], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_HEADER)
        for r in results:
            writer.writerow([r.index, r.subject_a, r.subject_b, r.status, r.output_path])
