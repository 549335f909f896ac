"""Uniform-refinement rate studies, adaptive studies and estimator comparisons."""
from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math
import time
from typing import Optional

import numpy as np

from ..adapt import AfemConfig, AfemResult, afem_run
from ..estimator import eta_indicators
from ..fem.functionals import (convergence_rate, energy_error, h1_seminorm_diff, prolongate,
                               solve_problem)
from ..fem.space import FESpace
from ..mesh.core import Mesh, on_segment_mask
from ..mesh.refine import red_refine
from .scenarios import Scenario, initial_mesh

log = logging.getLogger(__name__)

# peak resident bytes per triangle of the finest level, measured on the
# Union-Jack studies with AMG-preconditioned CG
BYTES_PER_TRIANGLE = {1: 800, 2: 2800}


@dataclass
class TableRow:
    j: int
    ndof: int
    nt: int
    h: float
    diff: float = math.nan          # |u^{j+1} - u^j|_{H1}
    rate: float = math.nan          # from diff[j-1] and diff[j]
    estimate: float = math.nan      # eta on level j (conforming meshes)
    error: float = math.nan         # true energy error when known
    seconds: float = 0.0


@dataclass
class ConvergenceTable:
    scenario: str
    k: int
    seed: str
    rows: list = field(default_factory=list)
    final: Optional[object] = field(default=None, repr=False)   # solution on the finest level

    def rate_at(self, j: int) -> float:
        return self.rows[j].rate

    def columns(self):
        return ["j", "ndof", "nt", "h", "diff", "rate", "estimate", "error", "seconds"]

    def as_rows(self):
        return [[getattr(r, c) for c in self.columns()] for r in self.rows]


def available_memory() -> Optional[int]:
    try:
        with open("/proc/meminfo") as fh:
            for ln in fh:
                if ln.startswith("MemAvailable:"):
                    return int(ln.split()[1]) * 1024
    except OSError:
        pass
    return None


def check_memory(nt0: int, k: int, levels: int, limit: Optional[int] = None):
    need = nt0 * 4 ** levels * BYTES_PER_TRIANGLE[k]
    limit = limit if limit is not None else available_memory()
    if limit is not None and need > limit:
        raise MemoryError(f"level {levels} needs about {need / 2**30:.1f} GiB "
                          f"but only {limit / 2**30:.1f} GiB is available; use fewer levels")
    return need


def run_uniform_study(sc: Scenario, k: int, levels: int, seed: Optional[str] = None,
                      n: Optional[int] = None, pattern: Optional[str] = None,
                      mode: Optional[str] = None, rtol: float = 1e-12,
                      with_estimator: bool = True, memory_limit: Optional[int] = None,
                      mesh: Optional[Mesh] = None) -> ConvergenceTable:
    """Solve on ``levels + 1`` red-refined meshes and tabulate rates.

    ``rows[j].diff`` is ``|u^{j+1} - u^j|_{H1}`` with ``u^j`` prolongated to
    level ``j + 1``, and ``rows[j].rate = log2(diff[j-1] / diff[j])``, so rates
    exist for ``1 <= j <= levels - 1``.  The line source is assembled edge by
    edge when the mesh tiles the fractures and by clipping otherwise, unless
    ``mode`` forces one of them.
    """
    if levels < 3:
        raise ValueError("a rate study needs at least 3 levels")
    spec = sc.spec
    mesh = mesh if mesh is not None else initial_mesh(sc, seed, n, pattern)
    check_memory(mesh.nt, k, levels, memory_limit)
    table = ConvergenceTable(sc.name, k, seed or sc.seed)
    prev = None
    for j in range(levels + 1):
        t0 = time.perf_counter()
        space = FESpace(mesh, k)
        conforming = mesh.tiles_fractures(spec.segments)
        m = mode or ("conforming" if conforming else "clipped")
        sol = solve_problem(space, spec, mode=m, rtol=rtol)
        row = TableRow(j, space.ndof, mesh.nt, float(mesh.diameters.max()))
        if with_estimator and conforming:
            row.estimate = eta_indicators(sol, spec).total
        if spec.exact_grad is not None:
            row.error = energy_error(sol, spec.exact_grad)
        if prev is not None:
            d = h1_seminorm_diff(sol, prolongate(prev, space))
            last = table.rows[-1]
            last.diff = d
            if j >= 2:
                last.rate = convergence_rate(table.rows[-2].diff, d)
        row.seconds = time.perf_counter() - t0
        table.rows.append(row)
        log.info("uniform %s P%d j=%d N=%d", sc.name, k, j, space.ndof)
        prev = sol
        if j < levels:
            mesh = red_refine(mesh)
            del space
    table.final = prev
    return table


def fit_slope(N, E, last: Optional[int] = None) -> float:
    """Least-squares slope of log E against log N over the last ``last`` points."""
    N = np.asarray(N, dtype=float)
    E = np.asarray(E, dtype=float)
    if last is not None:
        N, E = N[-last:], E[-last:]
    if len(N) < 2:
        raise ValueError("need at least two points for a slope")
    return float(np.polyfit(np.log(N), np.log(E), 1)[0])


@dataclass
class AfemStudy:
    result: AfemResult
    slope: float
    window: int
    config: AfemConfig

    @property
    def records(self):
        return self.result.records


def slope_window(nrec: int) -> int:
    return max(5, nrec // 3)


def run_afem_study(sc: Scenario, k: int, theta: float = 0.25, n: int = 50,
                   estimator: str = "eta", r: float = 0.05, rtol: float = 1e-12,
                   max_dofs: Optional[int] = None, seed_n: Optional[int] = None,
                   mesh: Optional[Mesh] = None) -> AfemStudy:
    """Adaptive run plus the slope of log(estimate) vs log(N) over the final iterations."""
    cfg = AfemConfig(theta=theta, n=n, k=k, estimator=estimator, r=r, rtol=rtol,
                     max_dofs=max_dofs)
    mesh = mesh if mesh is not None else initial_mesh(sc, "conforming", seed_n)
    res = afem_run(sc.spec, mesh, cfg)
    recs = res.records
    if len(recs) < 2:
        return AfemStudy(res, math.nan, 0, cfg)
    w = min(len(recs), slope_window(len(recs)))
    s = fit_slope([x.ndof for x in recs], [x.estimate for x in recs], w)
    return AfemStudy(res, s, w, cfg)


@dataclass
class Comparison:
    eta: AfemStudy
    xi: AfemStudy


def run_estimator_comparison(sc: Scenario, k: int, theta: float = 0.25, n: int = 50,
                             r: float = 0.05, rtol: float = 1e-12,
                             max_dofs: Optional[int] = None) -> Comparison:
    """Adaptive runs driven by eta and by xi from the same initial mesh."""
    mesh = initial_mesh(sc, "conforming")
    a = run_afem_study(sc, k, theta, n, "eta", r, rtol, max_dofs, mesh=mesh)
    b = run_afem_study(sc, k, theta, n, "xi", r, rtol, max_dofs, mesh=mesh)
    return Comparison(a, b)


# -- mesh audits ------------------------------------------------------------

def smallest_decile(mesh: Mesh) -> np.ndarray:
    """Indices of the 10% of elements with the smallest area."""
    m = max(1, int(math.ceil(0.1 * mesh.nt)))
    return np.argsort(mesh.areas, kind="stable")[:m]


def fraction_near_points(mesh: Mesh, points, radius: float) -> float:
    """Share of smallest-decile elements whose centroid is within ``radius`` of a point."""
    sel = smallest_decile(mesh)
    c = mesh.tri_xy[sel].mean(axis=1)
    P = np.asarray(points, dtype=float)
    d = np.min(np.hypot(c[:, None, 0] - P[None, :, 0], c[:, None, 1] - P[None, :, 1]), axis=1)
    return float(np.mean(d <= radius))


def touches_fracture_interior(mesh: Mesh, segments) -> np.ndarray:
    """Elements with a vertex in the relative interior of some fracture."""
    on = np.zeros(mesh.nv, dtype=bool)
    for s in segments:
        mask = on_segment_mask(mesh.vertices, s)
        ends = (np.hypot(*(mesh.vertices - np.array(s.a)).T) < 1e-12) | \
               (np.hypot(*(mesh.vertices - np.array(s.b)).T) < 1e-12)
        on |= mask & ~ends
    return on[mesh.triangles].any(axis=1)


def fraction_touching_fractures(mesh: Mesh, segments) -> float:
    sel = smallest_decile(mesh)
    return float(np.mean(touches_fracture_interior(mesh, segments)[sel]))
