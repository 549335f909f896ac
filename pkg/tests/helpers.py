"""Shared builders for the test modules."""
import numpy as np

from fracfem.fem import Fracture, ProblemSpec, constant
from fracfem.geometry import make_segment
from fracfem.harness.scenarios import get_scenario, initial_mesh
from fracfem.mesh import Mesh, bisect, unit_square

GAMMA = make_segment((0.25, 0.5), (0.75, 0.5))


def two_triangles():
    v = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    return Mesh.from_triangles(v, np.array([[0, 1, 2], [0, 2, 3]]))


def unit_triangle():
    v = np.array([[0, 0], [1, 0], [0, 1]], dtype=float)
    return Mesh.from_triangles(v, np.array([[0, 1, 2]]))


def scenario_mesh(name, n=None, pattern=None):
    sc = get_scenario(name)
    return sc, initial_mesh(sc, "conforming", n, pattern)


def randomly_bisected(mesh, seed, rounds=4):
    rng = np.random.default_rng(seed)
    for _ in range(rounds):
        k = int(rng.integers(1, max(2, mesh.nt // 3)))
        mesh = bisect(mesh, rng.choice(mesh.nt, size=k, replace=False))
    return mesh


def constant_spec(g=1.0, seg=GAMMA):
    return ProblemSpec(unit_square(), (Fracture(seg, constant(g)),))
