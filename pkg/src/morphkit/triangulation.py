"""Delaunay triangulation via incremental insertion (Bowyer-Watson).

The classic trick of enclosing the input in a huge but finite super
triangle breaks down when real points are nearly collinear with a hull
edge: the decision then hinges on a sagitta of order |edge|^2 / R which
underflows double precision for any R large enough to be safe.  Border
augmentation puts landmarks exactly on hull edges, so that failure mode
is not hypothetical here.

Instead the three synthetic vertices are treated symbolically as points
at infinity in three fixed directions, and every predicate involving
them is evaluated as the exact limit R -> oo of the finite predicate.
The limits reduce to half-plane tests plus low-degree tie-breakers, all
well conditioned in the coordinates of the real points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError

# Relative tolerance applied to every sign decision.  Determinants whose
# magnitude falls below EPS times their term scale are treated as zero.
EPS = 1e-12

# Sentinel returned by locate() when the query point is not covered.
OUTSIDE_HULL = -1

# Directions of the three symbolic vertices: 90, 210 and 330 degrees,
# counter-clockwise.  Unit length, summing to zero.
_SQ3 = np.sqrt(3.0)
_DIRS = np.array(
    [
        [0.0, 1.0],
        [-_SQ3 / 2.0, -0.5],
        [_SQ3 / 2.0, -0.5],
    ]
)


@dataclass(frozen=True)
class TriangleMesh:
    """Triangles as index triples into the point set they were built from.

    Triples are counter-clockwise, rotated so the smallest index comes
    first, and the list is sorted.  Equal inputs therefore produce equal
    meshes, element for element.
    """

    n_vertices: int
    triangles: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        for tri in self.triangles:
            if len(set(tri)) != 3:
                raise GeometryError(f"degenerate triangle {tri!r}")
            if any(i < 0 or i >= self.n_vertices for i in tri):
                raise GeometryError(f"triangle {tri!r} out of range")

    def dump(self) -> str:
        lines = [f"{a} {b} {c}" for a, b, c in self.triangles]
        return "\n".join(lines) + ("\n" if lines else "")


def _orient(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> int:
    """Sign of twice the signed area of finite triangle abc."""
    det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    mag = abs((b[0] - a[0]) * (c[1] - a[1])) + abs((b[1] - a[1]) * (c[0] - a[0]))
    if abs(det) <= EPS * mag:
        return 0
    return 1 if det > 0.0 else -1


def _circumcircle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> tuple[float, float, float]:
    """Center (x, y) and squared radius of the circle through a, b, c."""
    d = 2.0 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    if d == 0.0:
        raise GeometryError("collinear points have no circumcircle")
    b2 = (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2
    c2 = (c[0] - a[0]) ** 2 + (c[1] - a[1]) ** 2
    ux = (c[1] - a[1]) * b2 - (b[1] - a[1]) * c2
    uy = (b[0] - a[0]) * c2 - (c[0] - a[0]) * b2
    cx = a[0] + ux / d
    cy = a[1] + uy / d
    r2 = (cx - a[0]) ** 2 + (cy - a[1]) ** 2
    return cx, cy, r2


class _Builder:
    """State for one Bowyer-Watson run over a fixed point array."""

    def __init__(self, pts: np.ndarray) -> None:
        self.pts = pts
        n = len(pts)
        # Anchor for the tie rule of doubly-infinite triangles.  Any
        # fixed finite point works; the bounding-box center keeps the
        # arithmetic small.
        self.center = (pts.min(axis=0) + pts.max(axis=0)) / 2.0
        self.n = n
        # Vertex indices n, n+1, n+2 are the symbolic points.
        self.tris: list[tuple[int, int, int]] = [(n, n + 1, n + 2)]
        self.count = 1
        # Growable parallel buffers: liveness plus circumcenter and
        # squared radius for finite triangles (NaN marks a triangle
        # with a symbolic vertex).
        cap = 64
        self.alive = np.zeros(cap, dtype=bool)
        self.ccx = np.full(cap, np.nan)
        self.ccy = np.full(cap, np.nan)
        self.r2 = np.full(cap, np.nan)
        self.alive[0] = True
        # Live triangles with a symbolic vertex, in creation order.
        self.infinite: dict[int, None] = {0: None}

    def _grow(self) -> None:
        cap = len(self.alive)
        if self.count < cap:
            return
        for name in ("alive", "ccx", "ccy", "r2"):
            old = getattr(self, name)
            new = np.full(cap * 2, np.nan if old.dtype == np.float64 else False, dtype=old.dtype)
            new[:cap] = old
            setattr(self, name, new)

    def _is_super(self, i: int) -> bool:
        return i >= self.n

    def _dir(self, i: int) -> np.ndarray:
        return _DIRS[i - self.n]

    def _orient_any(self, i: int, j: int, k: int) -> int:
        """Orientation of a triangle that may include symbolic vertices.

        Evaluated as the limit of the finite determinant: the highest
        surviving power of R decides, with lower-order terms breaking
        ties.
        """
        tri = [i, j, k]
        n_super = sum(self._is_super(v) for v in tri)
        if n_super == 0:
            return _orient(self.pts[i], self.pts[j], self.pts[k])
        if n_super == 3:
            return 1
        # Rotate so the symbolic vertices come last; each rotation keeps
        # the orientation sign.
        while self._is_super(tri[0]) or not self._is_super(tri[2]):
            tri = [tri[1], tri[2], tri[0]]
        if n_super == 1:
            a, b, s = tri
            pa, pb = self.pts[a], self.pts[b]
            d = self._dir(s)
            lead = (pb[0] - pa[0]) * d[1] - (pb[1] - pa[1]) * d[0]
            scale = abs(pb[0] - pa[0]) + abs(pb[1] - pa[1])
            if abs(lead) > EPS * scale:
                return 1 if lead > 0.0 else -1
            trail = (pb[0] - pa[0]) * (self.center[1] - pa[1]) - (pb[1] - pa[1]) * (
                self.center[0] - pa[0]
            )
            if trail == 0.0:
                return 0
            return 1 if trail > 0.0 else -1
        # Two symbolic vertices: the R^2 coefficient is the cross
        # product of the two directions, never zero.
        s1, s2 = tri[1], tri[2]
        d1, d2 = self._dir(s1), self._dir(s2)
        lead = d1[0] * d2[1] - d1[1] * d2[0]
        return 1 if lead > 0.0 else -1

    def _in_circumdisk_infinite(self, tri: tuple[int, int, int], p: np.ndarray) -> bool:
        """Strict circumdisk membership for a triangle with symbolic vertices.

        Limit rules for a counter-clockwise triangle:

        * one symbolic vertex s after finite edge (a, b): the disk tends
          to the open half-plane left of a->b, and on the line itself to
          the open segment (a, b);
        * two symbolic vertices after finite vertex a: the disk tends to
          the open half-plane {x : (x - a) . (d1 + d2) > 0}, with points
          on the boundary line inside exactly when they are closer to
          the run's anchor point than a is;
        * three symbolic vertices: everything is inside.
        """
        supers = [v for v in tri if self._is_super(v)]
        if len(supers) == 3:
            return True
        if len(supers) == 1:
            order = list(tri)
            while not self._is_super(order[2]):
                order = [order[1], order[2], order[0]]
            a, b = self.pts[order[0]], self.pts[order[1]]
            ex, ey = b[0] - a[0], b[1] - a[1]
            side = ex * (p[1] - a[1]) - ey * (p[0] - a[0])
            scale = (abs(ex) + abs(ey)) * (abs(p[0] - a[0]) + abs(p[1] - a[1]))
            if abs(side) <= EPS * scale:
                t = (ex * (p[0] - a[0]) + ey * (p[1] - a[1])) / (ex * ex + ey * ey)
                return EPS < t < 1.0 - EPS
            return side > 0.0
        order = list(tri)
        while self._is_super(order[0]):
            order = [order[1], order[2], order[0]]
        a = self.pts[order[0]]
        m = self._dir(order[1]) + self._dir(order[2])
        h = (p[0] - a[0]) * m[0] + (p[1] - a[1]) * m[1]
        scale = abs(p[0] - a[0]) + abs(p[1] - a[1])
        if abs(h) > EPS * scale:
            return h > 0.0
        pa = p - self.center
        aa = a - self.center
        return pa[0] ** 2 + pa[1] ** 2 < aa[0] ** 2 + aa[1] ** 2

    def _bad_triangles(self, p: np.ndarray) -> list[int]:
        """Indices of live triangles whose circumdisk strictly contains p."""
        m = self.count
        r2 = self.r2[:m]
        d2 = (self.ccx[:m] - p[0]) ** 2 + (self.ccy[:m] - p[1]) ** 2
        # Strictly inside, with a relative guard so cocircular points
        # fall to the insertion-order tie instead.  NaN rows (symbolic
        # triangles) compare false and are handled below.
        hits = self.alive[:m] & (d2 < r2 * (1.0 - EPS))
        bad = [int(t) for t in np.nonzero(hits)[0]]
        for t in self.infinite:
            if self._in_circumdisk_infinite(self.tris[t], p):
                bad.append(t)
        bad.sort()
        return bad

    def insert(self, ip: int) -> None:
        p = self.pts[ip]
        bad = self._bad_triangles(p)
        if not bad:
            raise GeometryError(
                f"point {ip} falls in no circumdisk; duplicate or inconsistent input"
            )
        # Boundary of the cavity: edges that belong to exactly one bad
        # triangle, kept in the winding of that triangle.
        edge_count: dict[frozenset[int], int] = {}
        for t in bad:
            a, b, c = self.tris[t]
            for u, v in ((a, b), (b, c), (c, a)):
                key = frozenset((u, v))
                edge_count[key] = edge_count.get(key, 0) + 1
        for t in bad:
            self.alive[t] = False
            self.infinite.pop(t, None)
        for t in bad:
            a, b, c = self.tris[t]
            for u, v in ((a, b), (b, c), (c, a)):
                if edge_count[frozenset((u, v))] != 1:
                    continue
                tri = (u, v, ip)
                if self._orient_any(*tri) < 0:
                    tri = (v, u, ip)
                self._grow()
                tid = self.count
                self.tris.append(tri)
                self.alive[tid] = True
                self.count += 1
                if self._is_super(u) or self._is_super(v):
                    self.infinite[tid] = None
                else:
                    cx, cy, r2 = _circumcircle(self.pts[u], self.pts[v], p)
                    self.ccx[tid] = cx
                    self.ccy[tid] = cy
                    self.r2[tid] = r2

    def finish(self) -> list[tuple[int, int, int]]:
        out = []
        for t, tri in enumerate(self.tris):
            if not self.alive[t] or any(self._is_super(v) for v in tri):
                continue
            a, b, c = tri
            s = _orient(self.pts[a], self.pts[b], self.pts[c])
            if s == 0:
                # Zero-area leftovers only appear for degenerate input;
                # dropping them here would mask the problem.
                raise GeometryError(f"degenerate triangle {tri!r} in result")
            out.append(tri if s > 0 else (a, c, b))
        return out


def _canonical(tris: list[tuple[int, int, int]]) -> tuple[tuple[int, int, int], ...]:
    rotated = []
    for tri in tris:
        k = int(np.argmin(tri))
        rotated.append((tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]))
    return tuple(sorted(rotated))


def delaunay(points: np.ndarray) -> TriangleMesh:
    """Delaunay triangulation of a point set.

    Accepts any (n, 2) array-like with n >= 3; landmark sets pass their
    coordinate array.  Raises GeometryError for fewer than three points,
    duplicate points, or an all-collinear configuration.  Cocircular
    ties are resolved by insertion order, so the result is a function of
    the input sequence alone.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise GeometryError(f"expected (n, 2) points, got shape {pts.shape}")
    if len(pts) < 3:
        raise GeometryError(f"need at least 3 points, got {len(pts)}")
    if not np.all(np.isfinite(pts)):
        raise GeometryError("points must be finite")
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
    np.fill_diagonal(d2, np.inf)
    if np.min(d2) == 0.0:
        raise GeometryError("duplicate points")

    builder = _Builder(pts)
    for i in range(len(pts)):
        builder.insert(i)
    tris = builder.finish()
    if not tris:
        raise GeometryError("all points collinear")
    return TriangleMesh(n_vertices=len(pts), triangles=_canonical(tris))


def barycentric(p: np.ndarray, tri: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of p in the triangle with rows a, b, c."""
    a, b, c = tri
    det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    if det == 0.0:
        raise GeometryError("degenerate triangle has no barycentric frame")
    l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det
    l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det
    return np.array([1.0 - l1 - l2, l1, l2])


def locate(mesh: TriangleMesh, points: np.ndarray, p: np.ndarray) -> int:
    """Index of the first mesh triangle containing p, else OUTSIDE_HULL.

    Containment is closed: points on shared edges report the first
    triangle in mesh order, so every hull point maps to exactly one
    answer.
    """
    pts = np.asarray(points, dtype=np.float64)
    q = np.asarray(p, dtype=np.float64)
    for t, (a, b, c) in enumerate(mesh.triangles):
        lam = barycentric(q, pts[[a, b, c]])
        if np.all(lam >= -EPS):
            return t
    return OUTSIDE_HULL
