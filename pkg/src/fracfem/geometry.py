"""Small floating-point 2D geometry kernel.

Points, segments and triangles are immutable tuples.  Clipping works in the
parameter of the segment, ``p(t) = a + t (b - a)`` for ``t`` in ``[0, 1]``,
which is also the form the vectorised helpers return so that line integrals
can be mapped directly onto a fracture parametrisation.
"""
from __future__ import annotations

import math
from typing import NamedTuple, Optional

import numpy as np

EPS_GEOM = 1e-12


class Point2(NamedTuple):
    x: float
    y: float


class Segment(NamedTuple):
    a: Point2
    b: Point2

    @property
    def length(self) -> float:
        return math.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1])

    def at(self, t: float) -> Point2:
        return Point2(self.a[0] + t * (self.b[0] - self.a[0]),
                      self.a[1] + t * (self.b[1] - self.a[1]))


class Triangle2(NamedTuple):
    v0: Point2
    v1: Point2
    v2: Point2


def make_segment(a, b) -> Segment:
    """Build a segment from two coordinate pairs, rejecting zero length."""
    seg = Segment(Point2(float(a[0]), float(a[1])), Point2(float(b[0]), float(b[1])))
    if not all(math.isfinite(c) for p in seg for c in p):
        raise ValueError(f"non-finite segment coordinates {seg}")
    if seg.length <= EPS_GEOM:
        raise ValueError(f"degenerate segment {seg}")
    return seg


def signed_area(tri: Triangle2) -> float:
    (x0, y0), (x1, y1), (x2, y2) = tri
    return 0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))


def _clip_halfplanes(seg: Segment, normals, offsets):
    """Liang-Barsky clip of ``seg`` against ``n . p <= c`` half-planes.

    Returns the parameter interval or None.
    """
    ax, ay = seg.a
    dx, dy = seg.b.x - ax, seg.b.y - ay
    length = math.hypot(dx, dy)
    t0, t1 = 0.0, 1.0
    for (nx, ny), c in zip(normals, offsets):
        nn = math.hypot(nx, ny)
        # signed distance of p(t) past the plane is f0 + t * df
        f0 = (nx * ax + ny * ay - c) / nn
        df = (nx * dx + ny * dy) / nn
        if abs(df) <= 1e-15 * length:
            if f0 > EPS_GEOM:
                return None
            continue
        t = -f0 / df
        if df > 0:
            t1 = min(t1, t)
        else:
            t0 = max(t0, t)
    tol = EPS_GEOM / length
    if t0 < tol:
        t0 = 0.0
    if t1 > 1.0 - tol:
        t1 = 1.0
    if (t1 - t0) * length <= EPS_GEOM:
        return None
    return t0, t1


def _snap(p: Point2, anchors) -> Point2:
    for q in anchors:
        if math.hypot(p.x - q.x, p.y - q.y) <= EPS_GEOM:
            return Point2(q.x, q.y)
    return p


def clip_segment_to_triangle(seg: Segment, tri: Triangle2) -> Optional[Segment]:
    """Intersection of ``seg`` with the closed triangle, or None.

    Point-like intersections are reported as None.  Endpoints within
    ``EPS_GEOM`` of a triangle vertex are snapped onto that vertex.
    """
    seg = Segment(Point2(*seg.a), Point2(*seg.b))
    tri = Triangle2(*(Point2(*v) for v in tri))
    area = signed_area(tri)
    if abs(area) <= EPS_GEOM ** 2:
        raise ValueError("degenerate triangle")
    verts = list(tri) if area > 0 else [tri[0], tri[2], tri[1]]
    normals, offsets = [], []
    for i in range(3):
        p, q = verts[i], verts[(i + 1) % 3]
        # inside is to the left of p->q, i.e. outward normal (ey, -ex)
        nx, ny = q.y - p.y, -(q.x - p.x)
        normals.append((nx, ny))
        offsets.append(nx * p.x + ny * p.y)
    span = _clip_halfplanes(seg, normals, offsets)
    if span is None:
        return None
    a, b = seg.at(span[0]), seg.at(span[1])
    if span[0] == 0.0:
        a = seg.a
    if span[1] == 1.0:
        b = seg.b
    a, b = _snap(a, verts), _snap(b, verts)
    if math.hypot(b.x - a.x, b.y - a.y) <= EPS_GEOM:
        return None
    return Segment(a, b)


def clip_segment_to_box(seg: Segment, center: Point2, halfwidth: float) -> Optional[Segment]:
    """Intersection of ``seg`` with the closed square ``center +- halfwidth``."""
    if halfwidth <= 0:
        raise ValueError("halfwidth must be positive")
    seg = Segment(Point2(*seg.a), Point2(*seg.b))
    cx, cy = center
    normals = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
    offsets = [cx + halfwidth, -(cx - halfwidth), cy + halfwidth, -(cy - halfwidth)]
    span = _clip_halfplanes(seg, normals, offsets)
    if span is None:
        return None
    a = seg.a if span[0] == 0.0 else seg.at(span[0])
    b = seg.b if span[1] == 1.0 else seg.at(span[1])
    return Segment(a, b)


# ---------------------------------------------------------------------------
# vectorised helpers used by assembly and the regularised source

def clip_params_triangles(a, b, tri_xy):
    """Clip the segment ``a -> b`` against many triangles at once.

    Parameters
    ----------
    a, b : array_like, shape (2,)
    tri_xy : ndarray, shape (m, 3, 2), counter-clockwise triangles

    Returns
    -------
    t0, t1 : ndarray, shape (m,)
        Parameter interval of the intersection; empty where ``t1 <= t0``.
    """
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    length = float(np.hypot(*d))
    m = tri_xy.shape[0]
    t0 = np.zeros(m)
    t1 = np.ones(m)
    for i in range(3):
        p = tri_xy[:, i]
        q = tri_xy[:, (i + 1) % 3]
        e = q - p
        nrm = np.hypot(e[:, 0], e[:, 1])
        nx, ny = e[:, 1] / nrm, -e[:, 0] / nrm
        f0 = nx * (a[0] - p[:, 0]) + ny * (a[1] - p[:, 1])
        df = nx * d[0] + ny * d[1]
        par = np.abs(df) <= 1e-15 * length
        outside = par & (f0 > EPS_GEOM)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(par, 0.0, -f0 / np.where(par, 1.0, df))
        t1 = np.where(~par & (df > 0), np.minimum(t1, t), t1)
        t0 = np.where(~par & (df < 0), np.maximum(t0, t), t0)
        t1 = np.where(outside, -1.0, t1)
    tol = EPS_GEOM / length
    t0 = np.where(t0 < tol, 0.0, t0)
    t1 = np.where(t1 > 1.0 - tol, 1.0, t1)
    empty = (t1 - t0) * length <= EPS_GEOM
    t1 = np.where(empty, t0, t1)
    return t0, t1


def clip_params_boxes(a, b, centers, halfwidth):
    """Clip ``a -> b`` against axis-aligned squares centred at ``centers``."""
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    length = float(np.hypot(*d))
    centers = np.asarray(centers, dtype=float)
    t0 = np.zeros(centers.shape[0])
    t1 = np.ones(centers.shape[0])
    for k in range(2):
        lo = centers[:, k] - halfwidth
        hi = centers[:, k] + halfwidth
        if abs(d[k]) <= 1e-15 * length:
            out = (a[k] < lo) | (a[k] > hi)
            t1 = np.where(out, -1.0, t1)
            continue
        ta = (lo - a[k]) / d[k]
        tb = (hi - a[k]) / d[k]
        t0 = np.maximum(t0, np.minimum(ta, tb))
        t1 = np.minimum(t1, np.maximum(ta, tb))
    empty = (t1 - t0) * length <= EPS_GEOM
    t1 = np.where(empty, t0, t1)
    return t0, t1


def barycentric(tri_xy, pts):
    """Barycentric coordinates of ``pts`` (m, k, 2) in triangles (m, 3, 2)."""
    v0 = tri_xy[:, 0][:, None, :]
    e1 = (tri_xy[:, 1] - tri_xy[:, 0])[:, None, :]
    e2 = (tri_xy[:, 2] - tri_xy[:, 0])[:, None, :]
    r = pts - v0
    det = e1[..., 0] * e2[..., 1] - e1[..., 1] * e2[..., 0]
    l1 = (r[..., 0] * e2[..., 1] - r[..., 1] * e2[..., 0]) / det
    l2 = (e1[..., 0] * r[..., 1] - e1[..., 1] * r[..., 0]) / det
    return np.stack([1.0 - l1 - l2, l1, l2], axis=-1)


def point_in_polygon(pts, polygon) -> np.ndarray:
    """Even-odd test for points strictly inside a simple polygon."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    poly = np.asarray(polygon, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        crosses = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (x < xc)
    return inside


def polygon_area(polygon) -> float:
    poly = np.asarray(polygon, dtype=float)
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def distance_to_segment(pts, seg: Segment) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    a = np.array(seg.a)
    d = np.array(seg.b) - a
    t = np.clip(((pts - a) @ d) / (d @ d), 0.0, 1.0)
    proj = a + t[:, None] * d
    return np.hypot(*(pts - proj).T)
