"""Discrete solutions, prolongation between nested meshes and norms."""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from ..geometry import barycentric
from ..quadrature import gauss_triangle
from .assembly import assemble_load, assemble_stiffness, assemble_stiffness_full
from .solve import solve_spd
from .space import FESpace, basis_gradients, basis_values, local_nodes


@dataclass
class Solution:
    space: FESpace
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.space.ndof,):
            raise ValueError(f"expected {self.space.ndof} coefficients, got {self.coeffs.shape}")


def solve_problem(space: FESpace, spec, mode: str = "conforming", rtol: float = 1e-12,
                  precond: str = "auto") -> Solution:
    """Galerkin solution with homogeneous Dirichlet data eliminated."""
    b = assemble_load(space, spec, mode)
    A = assemble_stiffness(space)
    u = np.zeros(space.ndof)
    u[space.free] = solve_spd(A, b[space.free], rtol=rtol, precond=precond)
    return Solution(space, u)


def interpolate(space: FESpace, f) -> Solution:
    """Nodal interpolant of ``f(x, y)``."""
    X = space.node_coords
    return Solution(space, np.asarray(f(X[:, 0], X[:, 1]), dtype=float))


def prolongate(coarse: Solution, fine_space: FESpace) -> Solution:
    """Represent the coarse function in the fine space.

    The fine mesh must come from the coarse mesh by one call of
    ``red_refine`` or ``bisect``.  Fine coefficients are the coarse function
    evaluated at the fine nodes, which is exact for nested spaces of equal
    degree.
    """
    cm, fm = coarse.space.mesh, fine_space.mesh
    if fm is cm:
        return Solution(fine_space, coarse.coeffs.copy())
    if fm.parent is None or fm.parent_nt != cm.nt or fm.parent_nv != cm.nv:
        raise ValueError("meshes are not nested: fine mesh was not refined from the coarse one")
    if not np.array_equal(fm.vertices[:cm.nv], cm.vertices):
        raise ValueError("meshes are not nested: coarse vertices were moved")
    if fine_space.k < coarse.space.k:
        raise ValueError("fine space must have degree >= coarse degree")
    par = fm.parent
    nodes = local_nodes(fine_space.k)                       # (nn, 3)
    pts = np.einsum("ni,tid->tnd", nodes, fm.tri_xy)        # (nt, nn, 2)
    out = np.empty(fine_space.ndof)
    for s in range(0, fm.nt, 1 << 18):
        sl = slice(s, min(fm.nt, s + (1 << 18)))
        lam = barycentric(cm.tri_xy[par[sl]], pts[sl])
        if lam.min() < -1e-9:
            raise ValueError("meshes are not nested: fine node outside its parent triangle")
        phi = basis_values(coarse.space.k, lam)            # (m, nn, nbc)
        vals = np.einsum("mnb,mb->mn", phi, coarse.coeffs[coarse.space.dofs[par[sl]]])
        out[fine_space.dofs[sl].ravel()] = vals.ravel()
    return Solution(fine_space, out)


def h1_seminorm(sol: Solution) -> float:
    K = assemble_stiffness_full(sol.space)
    return math.sqrt(max(float(sol.coeffs @ (K @ sol.coeffs)), 0.0))


def _same_space(s: FESpace, t: FESpace) -> bool:
    m, n = s.mesh, t.mesh
    return s.k == t.k and (m is n or (np.array_equal(m.vertices, n.vertices)
                                      and np.array_equal(m.triangles, n.triangles)))


def h1_seminorm_diff(a: Solution, b: Solution) -> float:
    """|a - b|_{H^1}, exact for piecewise polynomials."""
    if a.space is not b.space and not _same_space(a.space, b.space):
        raise ValueError("solutions live on different spaces")
    d = a.coeffs - b.coeffs
    K = assemble_stiffness_full(a.space)
    return math.sqrt(max(float(d @ (K @ d)), 0.0))


def convergence_rate(e_prev: float, e_curr: float) -> float:
    if not (e_prev > 0 and e_curr > 0):
        raise ValueError(f"rates need positive errors, got {e_prev}, {e_curr}")
    return math.log2(e_prev / e_curr)


def vertex_gradients(sol: Solution) -> np.ndarray:
    """Gradient of ``sol`` at the three vertices of every triangle, (nt, 3, 2).

    The gradient is linear on each triangle for P2 and constant for P1, so
    these values determine it: grad(lambda) = sum_i lambda_i G[:, i].
    """
    sp = sol.space
    G, _ = sp.grad_lambda
    dphi = basis_gradients(sp.k, np.eye(3), G)              # (nt, 3, nb, 2)
    return np.einsum("tvbd,tb->tvd", dphi, sol.coeffs[sp.dofs])


def gradient_on(sol: Solution, t: int) -> np.ndarray:
    """Gradient on triangle ``t`` as its values at the triangle's vertices."""
    sp = sol.space
    G, _ = sp.grad_lambda
    dphi = basis_gradients(sp.k, np.eye(3), G[t:t + 1])[0]
    return np.einsum("vbd,b->vd", dphi, sol.coeffs[sp.dofs[t]])


def locate(mesh, pts, tol: float = 1e-12):
    """Containing triangle and barycentric coordinates for each point."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    tri = np.full(len(pts), -1)
    lam_out = np.zeros((len(pts), 3))
    xy = mesh.tri_xy
    for i, p in enumerate(pts):
        lo = xy.min(axis=1) - tol
        hi = xy.max(axis=1) + tol
        cand = np.flatnonzero(np.all((p >= lo) & (p <= hi), axis=1))
        if len(cand):
            lam = barycentric(xy[cand], np.broadcast_to(p, (len(cand), 1, 2)))[:, 0, :]
            inside = np.flatnonzero(lam.min(axis=1) >= -tol)
            if len(inside):
                j = inside[0]
                tri[i] = cand[j]
                lam_out[i] = lam[j]
    return tri, lam_out


def evaluate(sol: Solution, p) -> np.ndarray | float:
    """Point values of ``sol``; raises for points outside the mesh."""
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    tri, lam = locate(sol.space.mesh, pts)
    if np.any(tri < 0):
        bad = pts[np.flatnonzero(tri < 0)[0]]
        raise ValueError(f"point ({bad[0]:g}, {bad[1]:g}) is outside the domain")
    phi = basis_values(sol.space.k, lam)
    vals = np.einsum("pb,pb->p", phi, sol.coeffs[sol.space.dofs[tri]])
    return float(vals[0]) if np.ndim(p) == 1 else vals


def energy_error(sol: Solution, exact_grad, degree: int = 8) -> float:
    """sqrt of the integral of |grad u - grad u_h|^2 for a known gradient."""
    sp = sol.space
    rule = gauss_triangle(degree)
    G, area = sp.grad_lambda
    total = 0.0
    for s in range(0, sp.mesh.nt, 1 << 16):
        sl = slice(s, min(sp.mesh.nt, s + (1 << 16)))
        dphi = basis_gradients(sp.k, rule.points, G[sl])
        gh = np.einsum("tqbd,tb->tqd", dphi, sol.coeffs[sp.dofs[sl]])
        pts = np.einsum("qi,tid->tqd", rule.points, sp.mesh.tri_xy[sl])
        ge = exact_grad(pts[..., 0], pts[..., 1])
        err = np.sum((ge - gh) ** 2, axis=-1)
        total += float(np.sum(2.0 * area[sl] * (err @ rule.weights)))
    return math.sqrt(total)
