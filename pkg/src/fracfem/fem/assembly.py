"""Stiffness matrix and load vectors."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..errors import InvalidState
from ..geometry import barycentric, clip_params_triangles
from ..quadrature import gauss_triangle
from .lines import LINE_POINTS, piece_rules
from .space import FESpace, basis_gradients, basis_values

CHUNK = 1 << 18


def _chunks(n, size=CHUNK):
    for s in range(0, n, size):
        yield slice(s, min(n, s + size))


def local_stiffness(space: FESpace, sl=slice(None)) -> np.ndarray:
    """Element stiffness matrices, shape (nt, nb, nb)."""
    G, area = space.grad_lambda
    G, area = G[sl], area[sl]
    if space.k == 1:
        return area[:, None, None] * np.einsum("tid,tjd->tij", G, G)
    rule = gauss_triangle(2 * (space.k - 1))
    dphi = basis_gradients(space.k, rule.points, G)
    return 2.0 * area[:, None, None] * np.einsum("q,tqid,tqjd->tij", rule.weights, dphi, dphi)


def assemble_stiffness_full(space: FESpace) -> sp.csr_matrix:
    """Gradient Galerkin matrix over all DOFs, Dirichlet rows included."""
    cached = getattr(space, "_K_full", None)
    if cached is not None:
        return cached
    idx_t = np.int32 if space.ndof < 2**31 - 1 else np.int64
    nb = space.nb
    rows, cols, vals = [], [], []
    for sl in _chunks(space.mesh.nt):
        K = local_stiffness(space, sl)
        d = space.dofs[sl].astype(idx_t)
        rows.append(np.repeat(d, nb, axis=1).ravel())
        cols.append(np.tile(d, (1, nb)).ravel())
        vals.append(K.ravel())
    A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(space.ndof, space.ndof)).tocsr()
    A.sum_duplicates()
    space._K_full = A
    return A


def assemble_stiffness(space: FESpace) -> sp.csr_matrix:
    """Stiffness restricted to free DOFs (Dirichlet rows and columns removed)."""
    A = assemble_stiffness_full(space)
    f = space.free
    return A[f][:, f].tocsr()


def _scatter(space: FESpace, tris, local) -> np.ndarray:
    return np.bincount(space.dofs[tris].ravel(), weights=local.ravel(), minlength=space.ndof)


def _check_tiling(space: FESpace, fractures):
    mesh = space.mesh
    segs = tuple(f.segment for f in fractures)
    if tuple(mesh.fractures) != segs or not mesh.tiles_fractures():
        raise InvalidState("conforming line-source assembly needs a mesh whose edges tile every fracture")


def assemble_line_source(space: FESpace, fractures, mode: str = "conforming",
                         npts: int = LINE_POINTS) -> np.ndarray:
    """b_i = sum_l of the integral of g_l phi_i along fracture l.

    ``conforming`` walks the fracture-tagged edges; ``clipped`` intersects
    each fracture with the triangles it crosses and works on any mesh.  A
    clipped piece lying on an interior edge is shared half-and-half by the
    two triangles on that edge.
    """
    b = np.zeros(space.ndof)
    if mode == "conforming":
        _check_tiling(space, fractures)
        for l, fr in enumerate(fractures, start=1):
            b += _line_conforming(space, l, fr.g, npts)
    elif mode == "clipped":
        for fr in fractures:
            b += _line_clipped(space, fr.segment, fr.g, npts)
    else:
        raise ValueError(f"unknown line-source mode {mode!r}")
    return b


def _line_conforming(space, l, g, npts):
    mesh = space.mesh
    V = mesh.vertices
    E = np.flatnonzero(mesh.edge_class == l)
    t = mesh.edge_tris[E, 0]
    loc = np.argmax(mesh.tri_edges[t] == E[:, None], axis=1)
    lb, lc = (loc + 1) % 3, (loc + 2) % 3
    tri = mesh.triangles[t]
    r = np.arange(len(E))
    P, Q = V[tri[r, lb]], V[tri[r, lc]]
    b = np.zeros(space.ndof)
    for idx, s, w in piece_rules(g, P, Q, npts):
        m = len(idx)
        lam = np.zeros((m, len(s), 3))
        lam[np.arange(m), :, lb[idx]] = 1.0 - s
        lam[np.arange(m), :, lc[idx]] = s
        pts = P[idx, None, :] + s[None, :, None] * (Q[idx] - P[idx])[:, None, :]
        gv = g(pts[..., 0], pts[..., 1])
        L = np.hypot(*(Q[idx] - P[idx]).T)
        phi = basis_values(space.k, lam)
        local = L[:, None] * np.einsum("q,mq,mqb->mb", w, gv, phi)
        b += _scatter(space, t[idx], local)
    return b


def clip_pieces(mesh, seg):
    """Triangles crossed by ``seg`` and the parameter interval inside each.

    Returns ``(tris, t0, t1, share)`` where ``share`` is 1/2 for pieces that
    lie along an interior edge and 1 otherwise.
    """
    a = np.array(seg.a)
    d = np.array(seg.b) - a
    xy = mesh.tri_xy
    lo = np.minimum(a, a + d) - 1e-12
    hi = np.maximum(a, a + d) + 1e-12
    cand = np.flatnonzero(np.all(xy.max(axis=1) >= lo, axis=1) & np.all(xy.min(axis=1) <= hi, axis=1))
    t0, t1 = clip_params_triangles(a, a + d, xy[cand])
    ok = t1 > t0
    tris, t0, t1 = cand[ok], t0[ok], t1[ok]
    mid = a + 0.5 * (t0 + t1)[:, None] * d
    lam = barycentric(xy[tris], mid[:, None, :])[:, 0, :]
    on_edge = lam.min(axis=1) <= 1e-10
    share = np.ones(len(tris))
    if on_edge.any():
        k = np.argmin(lam[on_edge], axis=1)
        e = mesh.tri_edges[tris[on_edge], k]
        share[on_edge] = np.where(mesh.edge_tris[e, 1] >= 0, 0.5, 1.0)
    return tris, t0, t1, share


def _line_clipped(space, seg, g, npts):
    mesh = space.mesh
    a = np.array(seg.a)
    d = np.array(seg.b) - a
    tris, t0, t1, share = clip_pieces(mesh, seg)
    P = np.where((t0 == 0.0)[:, None], a, a + t0[:, None] * d)
    Q = np.where((t1 == 1.0)[:, None], a + d, a + t1[:, None] * d)
    b = np.zeros(space.ndof)
    for idx, s, w in piece_rules(g, P, Q, npts):
        pts = P[idx, None, :] + s[None, :, None] * (Q[idx] - P[idx])[:, None, :]
        lam = barycentric(mesh.tri_xy[tris[idx]], pts)
        gv = g(pts[..., 0], pts[..., 1])
        L = np.hypot(*(Q[idx] - P[idx]).T) * share[idx]
        phi = basis_values(space.k, lam)
        local = L[:, None] * np.einsum("q,mq,mqb->mb", w, gv, phi)
        b += _scatter(space, tris[idx], local)
    return b


def assemble_area_source(space: FESpace, q, degree=None) -> np.ndarray:
    """b_i = integral of q phi_i over the domain."""
    b = np.zeros(space.ndof)
    if q is None:
        return b
    rule = gauss_triangle(degree or space.k + 2)
    phi = basis_values(space.k, rule.points)
    _, area = space.grad_lambda
    xy = space.mesh.tri_xy
    for sl in _chunks(space.mesh.nt):
        pts = np.einsum("qi,tid->tqd", rule.points, xy[sl])
        qv = q(pts[..., 0], pts[..., 1])
        local = 2.0 * area[sl, None] * np.einsum("q,tq,qb->tb", rule.weights, qv, phi)
        b += np.bincount(space.dofs[sl].ravel(), weights=local.ravel(), minlength=space.ndof)
    return b


def assemble_load(space: FESpace, spec, mode: str = "conforming") -> np.ndarray:
    b = assemble_area_source(space, spec.area_source)
    if spec.fractures:
        b += assemble_line_source(space, spec.fractures, mode)
    return b
