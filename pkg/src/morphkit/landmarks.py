"""Facial landmark sets: parsing, validation, blending, and similarity alignment.

The text format is a count line followed by one "x y" pair per line; schemes
are inferred from the count (68-point detector output, the 189-point
annotation convention, or CUSTOM for anything else).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AdapterError, FormatError, GeometryError
from .raster import Raster, sample_bilinear_many
from .util import alpha_weights

COINCIDENT_TOL = 1e-6  # px; closer pairs would create zero-area Delaunay triangles


def scheme_for_count(n: int) -> str:
    if n == 68:
        return "P68"
    if n == 189:
        return "P189"
    return f"CUSTOM({n})"


@dataclass(frozen=True)
class LandmarkSet:
    """Ordered 2-D landmark coordinates, shape (n, 2) float64."""

    points: np.ndarray
    image_width: int | None = None
    image_height: int | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must have shape (n, 2), got {pts.shape}")
        n = pts.shape[0]
        if n < 3:
            raise ValueError(f"landmark set needs at least 3 points, got {n}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("landmark coordinates must be finite")
        diff = pts[:, None, :] - pts[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        np.fill_diagonal(d2, np.inf)
        if np.min(d2) < COINCIDENT_TOL**2:
            i, j = np.unravel_index(np.argmin(d2), d2.shape)
            raise ValueError(
                f"coincident landmarks {i} and {j} (closer than {COINCIDENT_TOL} px)"
            )
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def scheme(self) -> str:
        return scheme_for_count(self.count)


def parse_points_text(content: str, image_width: int | None = None,
                      image_height: int | None = None) -> LandmarkSet:
    """Parse the landmark text format: a count line, then one "x y" per line.

    Lines whose first non-space character is '#' and blank lines are ignored.
    """
    lines = [
        ln for ln in content.splitlines()
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not lines:
        raise FormatError("empty landmark file")
    head = lines[0].strip()
    try:
        n = int(head)
    except ValueError as exc:
        raise FormatError(f"expected point count on first line, got {head!r}") from exc
    if n < 3:
        raise FormatError(f"landmark count must be >= 3, got {n}")
    rows = lines[1:]
    if len(rows) != n:
        raise FormatError(f"count mismatch: header says {n}, found {len(rows)} rows")
    pts = np.empty((n, 2), dtype=np.float64)
    for i, row in enumerate(rows):
        tokens = row.split()
        if len(tokens) != 2:
            raise FormatError(f"row {i}: expected 'x y', got {row!r}")
        try:
            pts[i, 0] = float(tokens[0])
            pts[i, 1] = float(tokens[1])
        except ValueError as exc:
            raise FormatError(f"row {i}: non-numeric token in {row!r}") from exc
    try:
        return LandmarkSet(pts, image_width, image_height)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def format_points_text(lm: LandmarkSet) -> str:
    """Canonical text rendering (bit-exact inverse of parse_points_text)."""
    lines = [str(lm.count)]
    for x, y in lm.points:
        lines.append(f"{float(x)!r} {float(y)!r}")
    return "\n".join(lines) + "\n"


def load_points_file(path, image_width: int | None = None,
                     image_height: int | None = None) -> LandmarkSet:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_points_text(fh.read(), image_width, image_height)


def detect_landmarks_external(image_path, adapter, expected_count: int = 68) -> LandmarkSet:
    """Ask an external detector process for landmarks (see adapters module).

    The adapter must answer {"op":"landmarks","image":...} with
    {"points":[[x,y],...]}; a count other than expected_count is rejected.
    """
    response = adapter.request({"op": "landmarks", "image": str(image_path)})
    points = response.get("points")
    if not isinstance(points, list):
        raise AdapterError(f"landmark adapter returned no point list for {image_path}")
    if len(points) != expected_count:
        raise AdapterError(
            f"landmark adapter returned {len(points)} points for {image_path}, "
            f"expected {expected_count}"
        )
    try:
        return LandmarkSet(np.asarray(points, dtype=np.float64))
    except ValueError as exc:
        raise AdapterError(f"invalid landmark payload for {image_path}: {exc}") from exc


def weighted_mean_landmarks(la: LandmarkSet, lb: LandmarkSet, alpha: float) -> LandmarkSet:
    """Pointwise alpha-weighted mean: point_i = alpha*la_i + (1-alpha)*lb_i."""
    if la.count != lb.count or la.scheme != lb.scheme:
        raise ValueError(f"scheme mismatch: {la.scheme} vs {lb.scheme}")
    wa, wb = alpha_weights(alpha)
    return LandmarkSet(wa * la.points + wb * lb.points,
                       la.image_width, la.image_height)


def augment_border_points(la: LandmarkSet, lb: LandmarkSet,
                          width: int, height: int) -> tuple[LandmarkSet, LandmarkSet]:
    """Append the 4 corners and 4 edge midpoints to both sets (off by default
    in morphing; when on, the landmark hull covers the whole frame).

    Border points that would collide with an existing landmark in either set
    are skipped so the coincidence invariant keeps holding, and both outputs
    stay in pointwise correspondence.
    """
    if la.count != lb.count:
        raise ValueError(f"scheme mismatch: {la.scheme} vs {lb.scheme}")
    w, h = float(width - 1), float(height - 1)
    border = np.array([
        [0.0, 0.0], [w, 0.0], [w, h], [0.0, h],
        [w / 2.0, 0.0], [w, h / 2.0], [w / 2.0, h], [0.0, h / 2.0],
    ])
    keep = []
    for bp in border:
        da = np.min(np.sum((la.points - bp) ** 2, axis=1))
        db = np.min(np.sum((lb.points - bp) ** 2, axis=1))
        if min(da, db) >= COINCIDENT_TOL**2:
            keep.append(bp)
    extra = np.array(keep) if keep else np.empty((0, 2))
    return (
        LandmarkSet(np.vstack([la.points, extra]), la.image_width, la.image_height),
        LandmarkSet(np.vstack([lb.points, extra]), lb.image_width, lb.image_height),
    )


@dataclass(frozen=True)
class AlignmentTemplate:
    """Named anchor landmark indices and their target positions in a canonical
    output frame of output_width x output_height pixels."""

    anchors: dict[str, tuple[int, tuple[float, float]]]
    output_width: int
    output_height: int

    def __post_init__(self):
        if self.output_width < 1 or self.output_height < 1:
            raise ValueError("template output size must be positive")
        if len(self.anchors) < 2:
            raise ValueError("template needs at least 2 anchors")
        indices = [idx for idx, _ in self.anchors.values()]
        if len(set(indices)) != len(indices):
            raise ValueError("template anchor indices must be distinct")

    @classmethod
    def from_dict(cls, obj: dict) -> "AlignmentTemplate":
        try:
            size = obj["output_size"]
            anchors = {
                name: (int(spec["index"]), (float(spec["target"][0]), float(spec["target"][1])))
                for name, spec in obj["anchors"].items()
            }
            return cls(anchors, int(size[0]), int(size[1]))
        except (KeyError, TypeError, IndexError) as exc:
            raise FormatError(f"invalid alignment template: {exc}") from exc


def _similarity_from_anchors(src: np.ndarray, dst: np.ndarray) -> tuple[complex, complex]:
    """Least-squares similarity (rotation+scale+translation, no reflection)
    mapping src anchors onto dst anchors; returned as complex pair (a, b)
    with w = a*z + b."""
    if src.shape[0] < 2:
        raise GeometryError("need at least 2 anchors for a similarity transform")
    diff = src[:, None, :] - src[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(d2, np.inf)
    if np.min(d2) < 1e-18:
        raise GeometryError("degenerate anchors: two source anchors coincide")
    z = src[:, 0] + 1j * src[:, 1]
    w = dst[:, 0] + 1j * dst[:, 1]
    z_mean = z.mean()
    w_mean = w.mean()
    zc = z - z_mean
    wc = w - w_mean
    denom = np.sum(zc.conj() * zc).real
    if denom < 1e-18:
        raise GeometryError("degenerate anchors: zero spread")
    a = np.sum(zc.conj() * wc) / denom
    if abs(a) < 1e-15:
        raise GeometryError("degenerate anchors: collapsing transform")
    b = w_mean - a * z_mean
    return a, b


def align_to_template(raster: Raster, lm: LandmarkSet,
                      tpl: AlignmentTemplate) -> tuple[Raster, LandmarkSet]:
    """Map the image and its landmarks into the template frame with the
    least-squares similarity transform fitted on the template anchors."""
    for name, (idx, _) in tpl.anchors.items():
        if not 0 <= idx < lm.count:
            raise FormatError(
                f"anchor {name!r} index {idx} not resolvable in scheme {lm.scheme}"
            )
    src = np.array([lm.points[idx] for idx, _ in tpl.anchors.values()])
    dst = np.array([t for _, t in tpl.anchors.values()])
    a, b = _similarity_from_anchors(src, dst)

    z = lm.points[:, 0] + 1j * lm.points[:, 1]
    moved = a * z + b
    new_lm = LandmarkSet(
        np.column_stack([moved.real, moved.imag]),
        tpl.output_width, tpl.output_height,
    )

    ys, xs = np.mgrid[0:tpl.output_height, 0:tpl.output_width]
    grid = xs + 1j * ys
    back = (grid - b) / a
    out = sample_bilinear_many(raster, back.real, back.imag)
    return Raster(out), new_lm
