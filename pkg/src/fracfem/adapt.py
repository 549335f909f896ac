"""Bulk marking and the solve / estimate / mark / refine loop."""
from __future__ import annotations

from dataclasses import dataclass, field
import logging
import time
from typing import Optional

import numpy as np

from .estimator import IndicatorField, eta_indicators, xi_indicators
from .fem.functionals import Solution, solve_problem
from .fem.space import FESpace
from .mesh.core import Mesh
from .mesh.refine import bisect

log = logging.getLogger(__name__)


def dorfler_mark(indicators, theta: float) -> np.ndarray:
    """Smallest prefix of elements, by decreasing indicator, holding theta^2 of the total.

    Ties keep the lower element index first.  Returns sorted element indices.
    """
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    vals = indicators.values if isinstance(indicators, IndicatorField) else np.asarray(indicators)
    sq = np.asarray(vals, dtype=float) ** 2
    total = sq.sum()
    if total <= 0:
        return np.zeros(0, dtype=np.int64)
    order = np.argsort(-sq, kind="stable")
    csum = np.cumsum(sq[order])
    m = int(np.searchsorted(csum, theta * theta * total, side="left")) + 1
    m = min(m, len(sq))
    return np.sort(order[:m])


@dataclass
class AfemConfig:
    theta: float = 0.25
    n: int = 10
    k: int = 1
    estimator: str = "eta"       # "eta" or "xi"
    r: float = 0.05
    rtol: float = 1e-12
    max_dofs: Optional[int] = None   # stop early once N exceeds this

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise ValueError("theta must lie in (0, 1)")
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if self.k not in (1, 2):
            raise ValueError("k must be 1 or 2")
        if self.estimator not in ("eta", "xi"):
            raise ValueError("estimator must be 'eta' or 'xi'")
        if self.estimator == "xi" and self.r <= 0:
            raise ValueError("kernel half-width r must be positive")


@dataclass
class AfemRecord:
    j: int
    ndof: int
    nt: int
    estimate: float
    marked: int
    seconds: float


@dataclass
class AfemResult:
    solution: Solution
    mesh: Mesh
    records: list
    indicators: IndicatorField = field(repr=False, default=None)

    def __iter__(self):
        return iter((self.solution, self.mesh, self.records))


def estimate(sol: Solution, spec, cfg: AfemConfig) -> IndicatorField:
    if cfg.estimator == "eta":
        return eta_indicators(sol, spec)
    return xi_indicators(sol, spec, cfg.r)


def afem_run(spec, initial: Mesh, cfg: AfemConfig, callback=None) -> AfemResult:
    """Run ``cfg.n`` refinements of the adaptive loop from ``initial``.

    The discrete problem is always the line-source Galerkin system on a
    fracture-conforming mesh; only the indicator used for marking changes
    with ``cfg.estimator``.  Returns the last solution and mesh together with
    one record per solve.
    """
    mesh = initial
    records = []
    for i in range(cfg.n + 1):
        t0 = time.perf_counter()
        space = FESpace(mesh, cfg.k)
        sol = solve_problem(space, spec, mode="conforming", rtol=cfg.rtol)
        ind = estimate(sol, spec, cfg)
        last = i == cfg.n or (cfg.max_dofs is not None and space.ndof >= cfg.max_dofs)
        marked = np.zeros(0, dtype=np.int64) if last else dorfler_mark(ind, cfg.theta)
        rec = AfemRecord(i, space.ndof, mesh.nt, ind.total, len(marked), 0.0)
        if not last:
            mesh = bisect(mesh, marked)
        rec.seconds = time.perf_counter() - t0
        records.append(rec)
        log.info("afem %s P%d j=%d N=%d est=%.4e marked=%d", cfg.estimator, cfg.k, i,
                 rec.ndof, rec.estimate, rec.marked)
        if callback is not None:
            callback(rec, sol, ind)
        if last:
            return AfemResult(sol, sol.space.mesh, records, ind)
    raise AssertionError("unreachable")
