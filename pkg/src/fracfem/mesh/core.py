"""Conforming triangle meshes with an edge table and fracture tags."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from ..geometry import Segment

BOUNDARY = -1
INTERIOR = 0


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.flags.writeable = False
    return a


def build_topology(triangles: np.ndarray, nv: int):
    """Edge table for a triangle list.

    Local edge ``i`` of a triangle is the one opposite its vertex ``i``.
    Edges are numbered in increasing order of their sorted vertex pair.

    Returns ``edges (ne, 2)``, ``tri_edges (nt, 3)``, ``edge_tris (ne, 2)``
    (second column -1 on single-triangle edges) and the per-edge triangle
    count.
    """
    tris = np.asarray(triangles, dtype=np.int64)
    nt = len(tris)
    a = tris[:, [1, 2, 0]]
    b = tris[:, [2, 0, 1]]
    lo = np.minimum(a, b).ravel()
    hi = np.maximum(a, b).ravel()
    key = lo * np.int64(nv) + hi
    uniq, inv = np.unique(key, return_inverse=True)
    del key, lo, hi
    ne = len(uniq)
    edges = np.empty((ne, 2), dtype=np.int64)
    edges[:, 0] = uniq // nv
    edges[:, 1] = uniq % nv
    del uniq
    tri_edges = inv.reshape(nt, 3)
    count = np.bincount(inv, minlength=ne)
    order = np.argsort(inv, kind="stable")
    owner = order // 3
    start = np.concatenate([[0], np.cumsum(count)[:-1]])
    edge_tris = np.full((ne, 2), -1, dtype=np.int64)
    edge_tris[:, 0] = owner[start]
    two = count >= 2
    edge_tris[two, 1] = owner[start[two] + 1]
    return edges, tri_edges, edge_tris, count


def on_segment_mask(vertices: np.ndarray, seg: Segment, tol: float = 1e-10) -> np.ndarray:
    """Vertices lying on the closed segment (absolute tolerance)."""
    a = np.array(seg.a)
    d = np.array(seg.b) - a
    L2 = float(d @ d)
    r = vertices - a
    t = (r @ d) / L2
    dist = np.abs(r[:, 0] * d[1] - r[:, 1] * d[0]) / np.sqrt(L2)
    eps = tol / np.sqrt(L2)
    return (dist <= tol) & (t >= -eps) & (t <= 1 + eps)


def classify_edges(vertices, edges, count, fractures: Sequence[Segment]) -> np.ndarray:
    cls = np.where(count == 1, BOUNDARY, INTERIOR).astype(np.int32)
    for l, seg in enumerate(fractures, start=1):
        on = on_segment_mask(vertices, seg)
        hit = on[edges[:, 0]] & on[edges[:, 1]] & (count == 2)
        cls[hit] = l
    return cls


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable triangulation.

    ``edge_class`` holds ``BOUNDARY`` (-1), ``INTERIOR`` (0) or the 1-based
    index ``l`` of the fracture the edge lies on.  ``parent`` maps each
    triangle to the triangle of the mesh it was refined from, when known.
    """
    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    edge_class: np.ndarray
    tri_edges: np.ndarray
    edge_tris: np.ndarray
    generation: np.ndarray
    fractures: tuple = ()
    parent: Optional[np.ndarray] = None
    parent_nt: int = 0
    parent_nv: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_triangles(cls, vertices, triangles, fractures: Sequence[Segment] = (),
                       generation=None, parent=None, parent_nt=0, parent_nv=0) -> "Mesh":
        vertices = np.asarray(vertices, dtype=float)
        triangles = np.asarray(triangles, dtype=np.int64)
        edges, tri_edges, edge_tris, count = build_topology(triangles, len(vertices))
        edge_class = classify_edges(vertices, edges, count, fractures)
        if generation is None:
            generation = np.zeros(len(triangles), dtype=np.int32)
        return cls(
            vertices=_frozen(vertices, float),
            triangles=_frozen(triangles, np.int64),
            edges=_frozen(edges, np.int64),
            edge_class=_frozen(edge_class, np.int32),
            tri_edges=_frozen(tri_edges, np.int64),
            edge_tris=_frozen(edge_tris, np.int64),
            generation=_frozen(generation, np.int32),
            fractures=tuple(fractures),
            parent=None if parent is None else _frozen(parent, np.int64),
            parent_nt=int(parent_nt),
            parent_nv=int(parent_nv),
        )

    @property
    def nv(self) -> int:
        return len(self.vertices)

    @property
    def nt(self) -> int:
        return len(self.triangles)

    @property
    def ne(self) -> int:
        return len(self.edges)

    @cached_property
    def tri_xy(self) -> np.ndarray:
        return self.vertices[self.triangles]

    @cached_property
    def areas(self) -> np.ndarray:
        p = self.tri_xy
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    @cached_property
    def diameters(self) -> np.ndarray:
        """Longest edge of each triangle."""
        return self.edge_lengths[self.tri_edges].max(axis=1)

    @cached_property
    def boundary_vertex_mask(self) -> np.ndarray:
        mask = np.zeros(self.nv, dtype=bool)
        mask[self.edges[self.edge_class == BOUNDARY].ravel()] = True
        return mask

    def min_angle(self) -> float:
        p = self.tri_xy
        best = np.pi
        for i in range(3):
            u = p[:, (i + 1) % 3] - p[:, i]
            v = p[:, (i + 2) % 3] - p[:, i]
            c = np.einsum("ij,ij->i", u, v) / (np.hypot(*u.T) * np.hypot(*v.T))
            best = min(best, float(np.arccos(np.clip(c, -1, 1)).min()))
        return best

    def fracture_edges(self, l: int) -> np.ndarray:
        return np.flatnonzero(self.edge_class == l)

    def tiles_fractures(self, fractures: Optional[Sequence[Segment]] = None) -> bool:
        """True if every fracture is exactly a union of tagged edges."""
        fr = self.fractures if fractures is None else tuple(fractures)
        if not fr:
            return True
        if tuple(fr) != tuple(self.fractures):
            return False
        lengths = self.edge_lengths
        for l, seg in enumerate(fr, start=1):
            total = lengths[self.edge_class == l].sum()
            if abs(total - seg.length) > 1e-12 * max(1.0, seg.length) * 10:
                return False
        return True


@dataclass
class MeshReport:
    ok: bool
    violations: list

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "mesh ok"
        return "\n".join(self.violations)


def validate(mesh: Mesh, max_report: int = 50) -> MeshReport:
    """Check the structural invariants of ``mesh``."""
    out = []

    def add(msg):
        if len(out) < max_report:
            out.append(msg)

    tris = mesh.triangles
    if tris.size and (tris.min() < 0 or tris.max() >= mesh.nv):
        add("triangle references a vertex index out of range")
        return MeshReport(False, out)
    if not np.all(np.isfinite(mesh.vertices)):
        add("non-finite vertex coordinates")
    dup = (tris[:, 0] == tris[:, 1]) | (tris[:, 1] == tris[:, 2]) | (tris[:, 0] == tris[:, 2])
    for t in np.flatnonzero(dup):
        add(f"triangle {t}: repeated vertex")
    for t in np.flatnonzero(mesh.areas <= 0):
        add(f"triangle {t}: non-positive signed area {mesh.areas[t]:.3e}")

    edges, tri_edges, edge_tris, count = build_topology(tris, mesh.nv)
    if not (np.array_equal(edges, mesh.edges) and np.array_equal(tri_edges, mesh.tri_edges)
            and np.array_equal(edge_tris, mesh.edge_tris)):
        add("stored edge adjacency is inconsistent with the triangles")
    for e in np.flatnonzero(count > 2):
        add(f"edge {e} {tuple(edges[e])}: shared by {count[e]} triangles")

    if len(np.unique(mesh.vertices, axis=0)) != mesh.nv:
        add("duplicate vertex coordinates")

    # hanging nodes: a vertex strictly inside a single-triangle edge
    single = np.flatnonzero(count == 1)
    cand = np.unique(edges[single].ravel())
    if len(single) and len(cand):
        P = mesh.vertices[cand]
        for start in range(0, len(single), 2048):
            es = single[start:start + 2048]
            A = mesh.vertices[edges[es, 0]]
            D = mesh.vertices[edges[es, 1]] - A
            L2 = np.einsum("ij,ij->i", D, D)
            R = P[None, :, :] - A[:, None, :]
            t = np.einsum("ekj,ej->ek", R, D) / L2[:, None]
            cross = np.abs(R[..., 0] * D[:, None, 1] - R[..., 1] * D[:, None, 0]) / np.sqrt(L2)[:, None]
            tol = 1e-12 / np.sqrt(L2)[:, None]
            hit = (cross <= 1e-12) & (t > tol) & (t < 1 - tol)
            for i, k in zip(*np.nonzero(hit)):
                e = es[i]
                add(f"edge {e} {tuple(edges[e])}: hanging node at vertex {cand[k]}")

    expect = classify_edges(mesh.vertices, edges, count, mesh.fractures)
    if len(expect) == len(mesh.edge_class):
        bad = np.flatnonzero(expect != mesh.edge_class)
        for e in bad:
            add(f"edge {e}: class {mesh.edge_class[e]} but geometry says {expect[e]}")

    lengths = mesh.edge_lengths if len(mesh.edge_lengths) == len(edges) else None
    if lengths is not None:
        for l, seg in enumerate(mesh.fractures, start=1):
            tagged = lengths[mesh.edge_class == l].sum()
            if tagged > 0 and abs(tagged - seg.length) > 1e-11 * max(1.0, seg.length):
                add(f"fracture {l}: tagged edges cover {tagged:.15g} of length {seg.length:.15g}")
    return MeshReport(not out, out)
