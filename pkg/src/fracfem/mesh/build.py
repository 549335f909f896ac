"""Structured initial meshes for the unit square and the L-shaped domain."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..geometry import Point2, Segment, point_in_polygon, polygon_area
from .core import Mesh


@dataclass(frozen=True)
class DomainSpec:
    """Simple polygon, counter-clockwise, without holes."""
    polygon: tuple

    def __post_init__(self):
        poly = tuple(Point2(float(x), float(y)) for x, y in self.polygon)
        if len(poly) < 3:
            raise ValueError("polygon needs at least three vertices")
        if polygon_area(poly) <= 0:
            raise ValueError("polygon must be counter-clockwise with positive area")
        object.__setattr__(self, "polygon", poly)

    @property
    def bbox(self):
        p = np.array(self.polygon)
        return p.min(axis=0), p.max(axis=0)

    def contains(self, pts) -> np.ndarray:
        return point_in_polygon(pts, self.polygon)


def unit_square() -> DomainSpec:
    return DomainSpec(((0, 0), (1, 0), (1, 1), (0, 1)))


def lshape() -> DomainSpec:
    """(-1, 1)^2 with the quadrant [0, 1)^2 removed."""
    return DomainSpec(((-1, -1), (1, -1), (1, 0), (0, 0), (0, 1), (-1, 1)))


def build_unit_square_unionjack(n: int, fractures: Sequence[Segment] = ()) -> Mesh:
    """n x n cells on the unit square, each cut into four by both diagonals.

    Odd ``n`` keeps horizontal and vertical lines through the centre of the
    square off the edge set at every red-refinement level.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    g = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(g, g, indexing="xy")
    grid = np.column_stack([X.ravel(), Y.ravel()])
    c = (g[:-1] + g[1:]) / 2
    CX, CY = np.meshgrid(c, c, indexing="xy")
    centres = np.column_stack([CX.ravel(), CY.ravel()])
    verts = np.vstack([grid, centres])

    j, i = np.divmod(np.arange(n * n), n)
    p00 = j * (n + 1) + i
    p10 = p00 + 1
    p01 = p00 + n + 1
    p11 = p01 + 1
    ctr = (n + 1) ** 2 + j * n + i
    tris = np.stack([
        np.column_stack([p00, p10, ctr]),
        np.column_stack([p10, p11, ctr]),
        np.column_stack([p11, p01, ctr]),
        np.column_stack([p01, p00, ctr]),
    ], axis=1).reshape(-1, 3)
    return Mesh.from_triangles(verts, tris, fractures)


def _grid_index(v: float, lo: float, h: float, what: str) -> int:
    k = (v - lo) / h
    r = round(k)
    if abs(k - r) > 1e-9:
        raise ValueError(f"{what} = {float(v):g} is not on the grid "
                         f"(origin {float(lo):g}, spacing {float(h):g})")
    return int(r)


PATTERNS = ("diagonal", "alternating", "crisscross")


def build_fracture_conforming(domain: DomainSpec, fractures: Sequence[Segment], n: int,
                              pattern: str = "diagonal") -> Mesh:
    """Structured triangulation whose edges contain every fracture.

    The bounding box of ``domain`` is divided into cells of side
    ``width / n``.  Every polygon corner and every fracture endpoint must be
    a grid point.  Fractures must be horizontal, vertical or at 45 degrees.

    ``pattern`` picks the cell split: ``diagonal`` cuts every cell along
    ``/``, ``alternating`` flips the diagonal in a checkerboard, and
    ``crisscross`` uses both diagonals plus the cell centre.
    """
    if pattern not in PATTERNS:
        raise ValueError(f"unknown pattern {pattern!r}; choose from {PATTERNS}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    lo, hi = domain.bbox
    h = (hi[0] - lo[0]) / n
    nx = int(n)
    ny = _grid_index(hi[1], lo[1], h, "domain height")
    for p in domain.polygon:
        _grid_index(p.x, lo[0], h, "domain corner x")
        _grid_index(p.y, lo[1], h, "domain corner y")

    frac_cells = {}   # (i, j) -> "/" or "\\" forced by a diagonal fracture
    for l, seg in enumerate(fractures, start=1):
        ia = _grid_index(seg.a.x, lo[0], h, f"fracture {l} endpoint x")
        ja = _grid_index(seg.a.y, lo[1], h, f"fracture {l} endpoint y")
        ib = _grid_index(seg.b.x, lo[0], h, f"fracture {l} endpoint x")
        jb = _grid_index(seg.b.y, lo[1], h, f"fracture {l} endpoint y")
        di, dj = ib - ia, jb - ja
        if di != 0 and dj != 0:
            if abs(di) != abs(dj):
                raise ValueError(f"fracture {l} is neither axis-aligned nor diagonal on the grid")
            si, sj = np.sign(di), np.sign(dj)
            kind = "/" if si == sj else "\\"
            for s in range(abs(di)):
                ci = ia + s * si + (0 if si > 0 else -1)
                cj = ja + s * sj + (0 if sj > 0 else -1)
                frac_cells[(ci, cj)] = kind

    # cells whose centre lies inside the domain
    ci, cj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    ci, cj = ci.ravel(), cj.ravel()
    centres = np.column_stack([lo[0] + (ci + 0.5) * h, lo[1] + (cj + 0.5) * h])
    keep = domain.contains(centres)
    ci, cj = ci[keep], cj[keep]

    gid = lambda i, j: j * (nx + 1) + i
    p00, p10, p01, p11 = gid(ci, cj), gid(ci + 1, cj), gid(ci, cj + 1), gid(ci + 1, cj + 1)
    gx, gy = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="xy")
    grid = np.column_stack([lo[0] + gx.ravel() * h, lo[1] + gy.ravel() * h])

    if pattern == "crisscross":
        ctr = (nx + 1) * (ny + 1) + np.arange(len(ci))
        verts = np.vstack([grid, centres[keep]])
        tris = np.stack([
            np.column_stack([p00, p10, ctr]),
            np.column_stack([p10, p11, ctr]),
            np.column_stack([p11, p01, ctr]),
            np.column_stack([p01, p00, ctr]),
        ], axis=1).reshape(-1, 3)
    else:
        if pattern == "diagonal":
            slash = np.ones(len(ci), dtype=bool)
        else:
            slash = (ci + cj) % 2 == 0
        for k, (i, j) in enumerate(zip(ci.tolist(), cj.tolist())):
            forced = frac_cells.get((i, j))
            if forced is not None:
                slash[k] = forced == "/"
        t_sl = np.stack([np.column_stack([p00, p10, p11]), np.column_stack([p00, p11, p01])], axis=1)
        t_bs = np.stack([np.column_stack([p00, p10, p01]), np.column_stack([p10, p11, p01])], axis=1)
        tris = np.where(slash[:, None, None], t_sl, t_bs).reshape(-1, 3)
        verts = grid

    # drop unused grid points and renumber
    used = np.unique(tris)
    remap = np.full(len(verts), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    mesh = Mesh.from_triangles(verts[used], remap[tris], fractures)

    for l, seg in enumerate(fractures, start=1):
        if not np.all(domain.contains([seg.a, seg.b])):
            raise ValueError(f"fracture {l} is not strictly inside the domain")
        covered = mesh.edge_lengths[mesh.edge_class == l].sum()
        if abs(covered - seg.length) > 1e-12 * max(1.0, seg.length) * 10:
            raise ValueError(f"fracture {l} is not a union of mesh edges")
    return mesh
