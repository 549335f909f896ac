"""Residual a posteriori indicators for line-source problems.

``eta`` treats the fractures as flux jumps: the element residual carries no
line source and each interior edge is measured against ``f - [du/dn]``,
where ``f = g_l`` on edges of fracture ``l`` and 0 elsewhere.  ``xi`` is the
classical residual indicator for the problem with the line sources smeared
by a box kernel of half-width ``r``.

The flux jump across an edge is the sum of the outward normal derivatives
from both sides, so it does not depend on how the edge is oriented.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import InvalidState
from .fem.functionals import Solution, vertex_gradients
from .fem.lines import LINE_POINTS, piece_rules
from .fem.problem import ProblemSpec
from .geometry import clip_params_boxes
from .mesh.core import BOUNDARY
from .quadrature import gauss_interval, gauss_triangle


@dataclass
class IndicatorField:
    values: np.ndarray      # eta_T >= 0 per element
    kind: str

    @property
    def squares(self) -> np.ndarray:
        return self.values ** 2

    @property
    def total(self) -> float:
        return math.sqrt(float(np.sum(self.values ** 2)))

    def __len__(self):
        return len(self.values)


def laplacian(sol: Solution) -> np.ndarray:
    """Elementwise Laplacian of a P1/P2 function (constant per triangle)."""
    sp = sol.space
    if sp.k == 1:
        return np.zeros(sp.mesh.nt)
    G, _ = sp.grad_lambda
    c = sol.coeffs[sp.dofs]
    out = np.zeros(sp.mesh.nt)
    for i in range(3):
        j, m = (i + 1) % 3, (i + 2) % 3
        out += 4.0 * np.einsum("td,td->t", G[:, i], G[:, i]) * c[:, i]
        out += 8.0 * np.einsum("td,td->t", G[:, j], G[:, m]) * c[:, 3 + i]
    return out


def _element_term(sol: Solution, extra=None) -> np.ndarray:
    """h_T^2 || lap(u_h) + extra ||_T^2 with ``extra(x, y)`` optional."""
    sp = sol.space
    mesh = sp.mesh
    lap = laplacian(sol)
    h2 = mesh.diameters ** 2
    area = mesh.areas
    if extra is None:
        return h2 * area * lap ** 2
    rule = gauss_triangle(2 * sp.k + 2)
    out = np.empty(mesh.nt)
    for s in range(0, mesh.nt, 1 << 16):
        sl = slice(s, min(mesh.nt, s + (1 << 16)))
        pts = np.einsum("qi,tid->tqd", rule.points, mesh.tri_xy[sl])
        v = lap[sl, None] + extra(pts[..., 0], pts[..., 1])
        out[sl] = h2[sl] * 2.0 * area[sl] * ((v ** 2) @ rule.weights)
    return out


def _edge_jumps(sol: Solution, edges: np.ndarray):
    """Flux jump at both endpoints of interior ``edges``.

    Returns ``(P, Q, L, J0, J1)``: the endpoints and length of every edge
    and the jump at each endpoint.  The jump is linear along the edge for P2 and constant for
    P1.
    """
    mesh = sol.space.mesh
    Gv = vertex_gradients(sol)
    u, v = mesh.edges[edges, 0], mesh.edges[edges, 1]
    t1, t2 = mesh.edge_tris[edges, 0], mesh.edge_tris[edges, 1]
    P, Q = mesh.vertices[u], mesh.vertices[v]
    d = Q - P
    L = np.hypot(d[:, 0], d[:, 1])
    n = np.column_stack([d[:, 1], -d[:, 0]]) / L[:, None]
    loc1 = np.argmax(mesh.tri_edges[t1] == edges[:, None], axis=1)
    opp = mesh.vertices[mesh.triangles[t1, loc1]]
    flip = np.einsum("ed,ed->e", n, P - opp) < 0
    n[flip] *= -1.0                                  # outward for t1

    def at(t, vert):
        pos = np.argmax(mesh.triangles[t] == vert[:, None], axis=1)
        return Gv[t, pos]

    J0 = np.einsum("ed,ed->e", n, at(t1, u) - at(t2, u))
    J1 = np.einsum("ed,ed->e", n, at(t1, v) - at(t2, v))
    return P, Q, L, J0, J1


def _edge_term(sol: Solution, spec: ProblemSpec, subtract: bool, npts: int = LINE_POINTS):
    """Per-edge integral of (f - J)^2 (or J^2) over interior edges."""
    mesh = sol.space.mesh
    interior = np.flatnonzero(mesh.edge_class != BOUNDARY)
    P, Q, L, J0, J1 = _edge_jumps(sol, interior)
    # exact integral of the square of a linear function
    I = L * (J0 ** 2 + J0 * J1 + J1 ** 2) / 3.0
    if subtract:
        cls = mesh.edge_class[interior]
        for l, fr in enumerate(spec.fractures, start=1):
            sel = np.flatnonzero(cls == l)
            if len(sel) == 0:
                continue
            for idx, s, w in piece_rules(fr.g, P[sel], Q[sel], npts):
                e = sel[idx]
                pts = P[e, None, :] + s[None, :, None] * (Q[e] - P[e])[:, None, :]
                f = fr.g(pts[..., 0], pts[..., 1])
                J = (1.0 - s)[None, :] * J0[e, None] + s[None, :] * J1[e, None]
                I[e] = L[e] * (((f - J) ** 2) @ w)
    out = np.zeros(mesh.ne)
    out[interior] = I
    return out


def _distribute(mesh, edge_vals: np.ndarray) -> np.ndarray:
    """sum over interior edges of T of 1/2 h_T * edge value."""
    h = mesh.diameters
    return 0.5 * h * edge_vals[mesh.tri_edges].sum(axis=1)


def check_conforming(mesh, spec: ProblemSpec):
    if tuple(mesh.fractures) != spec.segments or not mesh.tiles_fractures():
        raise InvalidState("the transmission indicator needs a mesh whose edges tile every fracture")


def eta_indicators(sol: Solution, spec: ProblemSpec) -> IndicatorField:
    """h_T^2 ||lap u_h + q||_T^2 + 1/2 sum_e h_T ||f - [du_h/dn]||_e^2."""
    mesh = sol.space.mesh
    check_conforming(mesh, spec)
    vol = _element_term(sol, spec.area_source)
    edge = _distribute(mesh, _edge_term(sol, spec, subtract=True))
    return IndicatorField(np.sqrt(vol + edge), "eta")


def regularized_source(p, spec: ProblemSpec, r: float, npts: int = 8) -> np.ndarray:
    """Box-kernel smoothing of the line sources evaluated at points ``p``.

    g_r(p) = 1/(4 r^2) * sum_l of the integral of g_l over the part of
    fracture l inside the square of half-width ``r`` centred at ``p``.
    """
    if r <= 0:
        raise ValueError("kernel half-width r must be positive")
    pts = np.asarray(p, dtype=float)
    shape = pts.shape[:-1]
    pts = pts.reshape(-1, 2)
    out = np.zeros(len(pts))
    rule = gauss_interval(npts)
    for fr in spec.fractures:
        seg = fr.segment
        a = np.array(seg.a)
        d = np.array(seg.b) - a
        L = seg.length
        lo = np.minimum(a, a + d) - r
        hi = np.maximum(a, a + d) + r
        near = np.flatnonzero(np.all((pts >= lo) & (pts <= hi), axis=1))
        if len(near) == 0:
            continue
        t0, t1 = clip_params_boxes(a, a + d, pts[near], r)
        hit = t1 > t0
        near, t0, t1 = near[hit], t0[hit], t1[hit]
        if fr.g.is_constant:
            gval = float(fr.g(a[0], a[1]))
            out[near] += gval * (t1 - t0) * L
            continue
        A = a + t0[:, None] * d
        B = a + t1[:, None] * d
        for idx, s, w in piece_rules(fr.g, A, B, rule.points.size):
            q = A[idx, None, :] + s[None, :, None] * (B[idx] - A[idx])[:, None, :]
            out[near[idx]] += (t1 - t0)[idx] * L * (fr.g(q[..., 0], q[..., 1]) @ w)
    out /= 4.0 * r * r
    return out.reshape(shape)


def xi_indicators(sol: Solution, spec: ProblemSpec, r: float = 0.05) -> IndicatorField:
    """Classical residual indicator with the line sources smeared over ``r``."""
    if r <= 0:
        raise ValueError("kernel half-width r must be positive")
    mesh = sol.space.mesh
    q = spec.area_source

    if spec.fractures:
        def extra(x, y):
            v = regularized_source(np.stack([x, y], axis=-1), spec, r)
            return v if q is None else v + q(x, y)
    else:
        extra = q
    vol = _element_term(sol, extra)
    edge = _distribute(mesh, _edge_term(sol, spec, subtract=False))
    return IndicatorField(np.sqrt(vol + edge), "xi")


def oscillation(mesh, spec: ProblemSpec, k: int, edges=None, npts: int = LINE_POINTS) -> np.ndarray:
    """h_e ||f - P_k f||_e^2 on interior edges, P_k the L2 projection onto P_k(e)."""
    if edges is None:
        edges = np.flatnonzero(mesh.edge_class != BOUNDARY)
    edges = np.atleast_1d(np.asarray(edges))
    if np.any(mesh.edge_class[edges] == BOUNDARY):
        raise ValueError("oscillation is defined on interior edges only")
    out = np.zeros(len(edges))
    cls = mesh.edge_class[edges]
    P = mesh.vertices[mesh.edges[edges, 0]]
    Q = mesh.vertices[mesh.edges[edges, 1]]
    L = np.hypot(*(Q - P).T)
    for l, fr in enumerate(spec.fractures, start=1):
        sel = np.flatnonzero(cls == l)
        if len(sel) == 0 or fr.g.is_constant:
            continue
        for idx, s, w in piece_rules(fr.g, P[sel], Q[sel], npts):
            e = sel[idx]
            pts = P[e, None, :] + s[None, :, None] * (Q[e] - P[e])[:, None, :]
            f = fr.g(pts[..., 0], pts[..., 1])                # (m, q)
            # orthonormal Legendre basis on [0, 1]
            B = np.stack([np.sqrt(2 * j + 1) * np.polynomial.legendre.legval(
                2 * s - 1, np.eye(k + 1)[j]) for j in range(k + 1)], axis=0)
            c = (f * w) @ B.T                                 # (m, k+1)
            resid = f - c @ B
            out[e] = L[e] * L[e] * ((resid ** 2) @ w)
    return out


__all__ = ["IndicatorField", "eta_indicators", "xi_indicators", "regularized_source",
           "oscillation", "laplacian"]
