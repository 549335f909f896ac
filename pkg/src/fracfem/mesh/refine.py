"""Uniform red refinement and longest-edge bisection with conformity closure."""
from __future__ import annotations

import numpy as np

from .core import Mesh

_TIE = 1e-12


def red_refine(mesh: Mesh) -> Mesh:
    """Split every triangle into four through its edge midpoints.

    The midpoint of edge ``e`` becomes vertex ``mesh.nv + e``.  Child ``k`` of
    triangle ``t`` is triangle ``4 t + k``.
    """
    V, E = mesh.vertices, mesh.edges
    mids = 0.5 * (V[E[:, 0]] + V[E[:, 1]])
    verts = np.vstack([V, mids])
    a, b, c = mesh.triangles.T
    ma, mb, mc = (mesh.nv + mesh.tri_edges).T
    tris = np.stack([
        np.column_stack([a, mc, mb]),
        np.column_stack([mc, b, ma]),
        np.column_stack([mb, ma, c]),
        np.column_stack([ma, mb, mc]),
    ], axis=1).reshape(-1, 3)
    parent = np.repeat(np.arange(mesh.nt), 4)
    gen = np.repeat(mesh.generation + 1, 4)
    return Mesh.from_triangles(verts, tris, mesh.fractures, generation=gen,
                               parent=parent, parent_nt=mesh.nt, parent_nv=mesh.nv)


class _Work:
    """Mutable working copy of a mesh used during bisection."""

    def __init__(self, mesh: Mesh):
        self.V = mesh.vertices.tolist()
        self.T = mesh.triangles.tolist()
        self.TE = mesh.tri_edges.tolist()
        self.E = mesh.edges.tolist()
        self.ET = mesh.edge_tris.tolist()
        self.L2 = (mesh.edge_lengths ** 2).tolist()
        self.gen = mesh.generation.tolist()
        self.origin = list(range(mesh.nt))
        self.splits = [0] * mesh.nt

    def longest(self, t):
        te = self.TE[t]
        l0, l1, l2 = self.L2[te[0]], self.L2[te[1]], self.L2[te[2]]
        top = max(l0, l1, l2) * (1.0 - _TIE)
        best = -1
        for i, l in ((0, l0), (1, l1), (2, l2)):
            if l >= top and (best < 0 or te[i] < te[best]):
                best = i
        return best

    def _new_edge(self, u, v, t0, t1):
        self.E.append([u, v])
        self.ET.append([t0, t1])
        pu, pv = self.V[u], self.V[v]
        self.L2.append((pu[0] - pv[0]) ** 2 + (pu[1] - pv[1]) ** 2)
        return len(self.E) - 1

    def _swap_owner(self, e, old, new):
        et = self.ET[e]
        if et[0] == old:
            et[0] = new
        elif et[1] == old:
            et[1] = new

    def split_edge(self, e):
        """Bisect edge ``e`` and every triangle on it (at most two)."""
        u, v = self.E[e]
        pu, pv = self.V[u], self.V[v]
        self.V.append([0.5 * (pu[0] + pv[0]), 0.5 * (pu[1] + pv[1])])
        m = len(self.V) - 1
        owners = [t for t in self.ET[e] if t >= 0]
        # halves: reuse e for (u, m), append (m, v)
        self.E[e] = [u, m]
        self.L2[e] = 0.25 * self.L2[e]
        self.ET[e] = [-1, -1]
        e2 = self._new_edge(m, v, -1, -1)
        self.L2[e2] = self.L2[e]
        half = {u: e, v: e2}
        for t in owners:
            i = self.TE[t].index(e)
            a = self.T[t][i]
            b = self.T[t][(i + 1) % 3]
            c = self.T[t][(i + 2) % 3]
            e_ab = self.TE[t][(i + 2) % 3]
            e_ca = self.TE[t][(i + 1) % 3]
            t2 = len(self.T)
            # child 1 keeps slot t: (a, b, m); child 2 is new: (a, m, c)
            e_am = self._new_edge(a, m, t, t2)
            e_bm, e_mc = half[b], half[c]
            self.T[t] = [a, b, m]
            self.TE[t] = [e_bm, e_am, e_ab]
            self.T.append([a, m, c])
            self.TE.append([e_mc, e_ca, e_am])
            self._swap_owner(e_ca, t, t2)
            for eh, tt in ((e_bm, t), (e_mc, t2)):
                et = self.ET[eh]
                if et[0] < 0:
                    et[0] = tt
                else:
                    et[1] = tt
            g = self.gen[t] + 1
            self.gen[t] = g
            self.gen.append(g)
            self.origin.append(self.origin[t])
            self.splits[t] += 1
            self.splits.append(0)

    def refine(self, t0):
        """Longest-edge propagation path refinement of triangle ``t0``."""
        before = self.splits[t0]
        guard = 0
        while self.splits[t0] == before:
            t = t0
            while True:
                guard += 1
                if guard > 10_000_000:
                    raise RuntimeError("longest-edge path did not terminate")
                e = self.TE[t][self.longest(t)]
                et = self.ET[e]
                nb = et[1] if et[0] == t else et[0]
                if nb < 0 or self.TE[nb][self.longest(nb)] == e:
                    self.split_edge(e)
                    break
                t = nb


def bisect(mesh: Mesh, marked) -> Mesh:
    """Refine each marked triangle by longest-edge bisection.

    Neighbours are bisected first along the longest-edge propagation path
    until the shared edge is the longest edge of both triangles, so the
    result is conforming.  Ties between equally long edges go to the edge
    with the smaller index.  The parent of every output triangle is the
    input triangle that contains it.
    """
    marked = sorted({int(t) for t in marked})
    if not marked:
        return mesh
    if marked[0] < 0 or marked[-1] >= mesh.nt:
        raise IndexError("marked triangle index out of range")
    w = _Work(mesh)
    for t in marked:
        if w.splits[t] == 0:
            w.refine(t)
    return Mesh.from_triangles(np.array(w.V), np.array(w.T, dtype=np.int64), mesh.fractures,
                               generation=np.array(w.gen, dtype=np.int32),
                               parent=np.array(w.origin, dtype=np.int64),
                               parent_nt=mesh.nt, parent_nv=mesh.nv)
