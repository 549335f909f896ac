"""Lagrange P1/P2 spaces and reference basis functions.

Local DOFs on a triangle are its three vertices followed, for P2, by the
midpoints of the edges opposite vertices 0, 1, 2.  The global number of the
midpoint DOF on edge ``e`` is ``nv + e``.
"""
from __future__ import annotations

from functools import cached_property

import numpy as np

from ..mesh.core import BOUNDARY, Mesh


def grad_barycentric(tri_xy: np.ndarray):
    """Gradients of the barycentric coordinates, shape (nt, 3, 2), and areas."""
    x, y = tri_xy[..., 0], tri_xy[..., 1]
    area2 = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
    G = np.empty(tri_xy.shape)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        G[:, i, 0] = (y[:, j] - y[:, k]) / area2
        G[:, i, 1] = (x[:, k] - x[:, j]) / area2
    return G, 0.5 * area2


def basis_values(k: int, lam: np.ndarray) -> np.ndarray:
    """Shape functions at barycentric points ``lam`` (..., 3) -> (..., nb)."""
    if k == 1:
        return lam.copy()
    l0, l1, l2 = lam[..., 0], lam[..., 1], lam[..., 2]
    return np.stack([l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
                     4 * l1 * l2, 4 * l2 * l0, 4 * l0 * l1], axis=-1)


def basis_bary_derivs(k: int, lam: np.ndarray) -> np.ndarray:
    """d phi_b / d lambda_i at ``lam`` (q, 3) -> (q, nb, 3)."""
    q = lam.shape[0]
    if k == 1:
        return np.broadcast_to(np.eye(3), (q, 3, 3)).copy()
    D = np.zeros((q, 6, 3))
    for i in range(3):
        D[:, i, i] = 4 * lam[:, i] - 1
        j, m = (i + 1) % 3, (i + 2) % 3
        D[:, 3 + i, j] = 4 * lam[:, m]
        D[:, 3 + i, m] = 4 * lam[:, j]
    return D


def basis_gradients(k: int, lam: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Physical gradients, (nt, q, nb, 2), for reference points ``lam`` (q, 3)."""
    D = basis_bary_derivs(k, lam)
    return np.einsum("qbi,tid->tqbd", D, G)


def local_nodes(k: int) -> np.ndarray:
    """Barycentric coordinates of the local DOF nodes."""
    nodes = np.eye(3)
    if k == 2:
        nodes = np.vstack([nodes, [[0, .5, .5], [.5, 0, .5], [.5, .5, 0]]])
    return nodes


class FESpace:
    """Continuous Lagrange space of degree ``k`` on ``mesh``."""

    def __init__(self, mesh: Mesh, k: int):
        if k not in (1, 2):
            raise ValueError(f"unsupported polynomial degree {k}; use 1 or 2")
        self.mesh = mesh
        self.k = k
        if k == 1:
            self.dofs = mesh.triangles
            self.ndof = mesh.nv
        else:
            self.dofs = np.hstack([mesh.triangles, mesh.nv + mesh.tri_edges])
            self.ndof = mesh.nv + mesh.ne
        self.nb = self.dofs.shape[1]

    @property
    def dof_count(self) -> int:
        return self.ndof

    @cached_property
    def dirichlet_mask(self) -> np.ndarray:
        mask = np.zeros(self.ndof, dtype=bool)
        m = self.mesh
        bnd = m.edge_class == BOUNDARY
        mask[m.edges[bnd].ravel()] = True
        if self.k == 2:
            mask[m.nv + np.flatnonzero(bnd)] = True
        return mask

    @cached_property
    def free(self) -> np.ndarray:
        return np.flatnonzero(~self.dirichlet_mask)

    @cached_property
    def node_coords(self) -> np.ndarray:
        m = self.mesh
        if self.k == 1:
            return m.vertices
        mids = 0.5 * (m.vertices[m.edges[:, 0]] + m.vertices[m.edges[:, 1]])
        return np.vstack([m.vertices, mids])

    @cached_property
    def grad_lambda(self):
        return grad_barycentric(self.mesh.tri_xy)

    def __repr__(self):
        return f"FESpace(P{self.k}, ndof={self.ndof}, nt={self.mesh.nt})"


def build_space(mesh: Mesh, k: int) -> FESpace:
    return FESpace(mesh, k)
