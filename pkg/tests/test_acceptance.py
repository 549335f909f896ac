"""Acceptance gate: one PASS/FAIL line per criterion at the stated tolerances.

Uniform rate studies run to the deepest level that fits in memory on a
single desktop node.  Level ``j`` here is the rate computed from the
differences between levels ``j-1, j`` and ``j, j+1`` of a red-refined
hierarchy that starts from the seed mesh.
"""
import functools
import gc
import os
import subprocess
import sys
import time

import numpy as np

from acceptance_report import report
from fracfem.estimator import eta_indicators
from fracfem.fem import FESpace, h1_seminorm_diff, prolongate, solve_problem
from fracfem.harness import (fraction_near_points, fraction_touching_fractures,
                             get_scenario, initial_mesh, run_afem_study,
                             run_estimator_comparison, run_uniform_study)
from fracfem.harness.scenarios import Q1, Q2
from fracfem.mesh import red_refine

HERE = os.path.dirname(__file__)
AFEM_DOFS = 100_000
THETA = 0.25


@functools.lru_cache(maxsize=None)
def afem(name, k):
    return run_afem_study(get_scenario(name), k, THETA, n=1000, max_dofs=AFEM_DOFS)


@functools.lru_cache(maxsize=None)
def lshape(k):
    return run_estimator_comparison(get_scenario("lshape_loop"), k, THETA, n=1000, r=0.05,
                                    max_dofs=AFEM_DOFS)


def uniform_rate(name, k, seed, levels, j):
    gc.collect()
    t = run_uniform_study(get_scenario(name), k, levels, seed=seed, with_estimator=False)
    rate = t.rate_at(j)
    del t
    gc.collect()
    return rate


def within(x, target, tol):
    return abs(x - target) <= tol


def test_criterion_1_unionjack_rates():
    # Union-Jack seed, one cell; P1 rate at j=9 (4.2M triangles), P2 at j=7
    r1 = uniform_rate("case3", 1, "unionjack", 10, 9)
    r2 = uniform_rate("case6", 2, "unionjack", 8, 7)
    ok = within(r1, 0.497, 0.02) and within(r2, 0.500, 0.02)
    assert report(1, ok, f"Union-Jack case3 P1 R={r1:.4f} (0.497+-0.02), "
                         f"case6 P2 R={r2:.4f} (0.500+-0.02)")


def test_criterion_2_conforming_rates():
    # conforming seed n=4; deepest rates that fit in memory: P1 j=7, P2 j=6
    got = {
        ("case1", 1): (uniform_rate("case1", 1, "conforming", 8, 7), 0.783, 0.03),
        ("case3", 1): (uniform_rate("case3", 1, "conforming", 8, 7), 0.932, 0.03),
        ("case5", 2): (uniform_rate("case5", 2, "conforming", 7, 6), 1.501, 0.03),
        ("case6", 2): (uniform_rate("case6", 2, "conforming", 7, 6), 1.914, 0.05),
    }
    ok = all(within(r, t, tol) for r, t, tol in got.values())
    detail = ", ".join(f"{n} P{k} R={r:.4f} ({t}+-{tol})" for (n, k), (r, t, tol) in got.items())
    assert report(2, ok, "conforming " + detail)


AFEM_NAMES = [f"case{i}" for i in range(1, 7)] + ["geometry1", "geometry2", "geometry3"]
BANDS = {1: (-0.6, -0.4), 2: (-1.15, -0.85)}


def test_criterion_3_afem_slopes():
    parts, ok = [], True
    for k in (1, 2):
        for name in AFEM_NAMES:
            s = afem(name, k)
            lo, hi = BANDS[k]
            good = lo <= s.slope <= hi and s.records[-1].ndof >= AFEM_DOFS
            ok &= good
            parts.append(f"{name} P{k} {s.slope:.3f}" + ("" if good else " (out)"))
    assert report(3, ok, "AFEM slopes to N>=1e5: " + ", ".join(parts))


def test_criterion_4_estimator_comparison():
    c2, c1 = lshape(2), lshape(1)
    ok = (c2.eta.slope <= -0.85 and c2.xi.slope >= -0.65
          and all(-0.6 <= s <= -0.4 for s in (c1.eta.slope, c1.xi.slope)))
    assert report(4, ok, f"L-shape P2 eta {c2.eta.slope:.3f} (<=-0.85) xi {c2.xi.slope:.3f} "
                         f"(>=-0.65); P1 eta {c1.eta.slope:.3f} xi {c1.xi.slope:.3f} "
                         f"(in [-0.6,-0.4])")


def test_criterion_5_localization():
    near = fraction_near_points(afem("case3", 1).result.mesh, [Q1, Q2], 0.1)
    segs = get_scenario("lshape_loop").spec.segments
    parts, ok = [f"case3 P1 near endpoints {near:.3f} (>=0.5)"], near >= 0.5
    for k in (1, 2):
        c = lshape(k)
        fe = fraction_touching_fractures(c.eta.result.mesh, segs)
        fx = fraction_touching_fractures(c.xi.result.mesh, segs)
        ok &= fx > fe
        parts.append(f"L-shape P{k} touching fractures xi {fx:.3f} > eta {fe:.3f}")
    assert report(5, ok, "; ".join(parts))


def test_criterion_6_manufactured():
    parts, ok = [], True
    for k, want, tol in ((1, 1.0, 0.05), (2, 2.0, 0.1)):
        t = run_uniform_study(get_scenario("manufactured_sin"), k, 5)
        E = [r.error for r in t.rows]
        rate = float(np.log2(E[-2] / E[-1]))
        eff = [r.estimate / r.error for r in t.rows]
        band = max(eff) / min(eff)
        good = within(rate, want, tol) and band <= 3.0
        ok &= good
        parts.append(f"P{k} rate {rate:.3f} ({want}+-{tol}) effectivity band x{band:.3f} (<=3)")
    assert report(6, ok, "manufactured " + "; ".join(parts))


def test_effectivity_proxy_case3():
    sc = get_scenario("case3")
    parts, ok = [], True
    for k, levels in ((1, 7), (2, 6)):
        m, sols = initial_mesh(sc), []
        for _ in range(levels):
            sols.append(solve_problem(FESpace(m, k), sc.spec))
            m = red_refine(m)
        ratios = []
        for j, s in enumerate(sols[:-1]):
            p = s
            for q in sols[j + 1:]:
                p = prolongate(p, q.space)
            ratios.append(eta_indicators(s, sc.spec).total / h1_seminorm_diff(p, sols[-1]))
        band = max(ratios) / min(ratios)
        ok &= band <= 10
        parts.append(f"P{k} C/c={band:.3f}")
    assert report("6b", ok, "case3 effectivity proxy (<=10) " + ", ".join(parts))


PROPERTY_SELECTION = [
    "tests/test_mesh.py",
    "tests/test_quadrature.py",
    "tests/test_fem.py::test_reference_stiffness",
    "tests/test_fem.py::test_clipped_equals_conforming",
    "tests/test_fem.py::test_clipped_equals_conforming_on_bisected_meshes",
    "tests/test_fem.py::test_prolongation_exactness",
    "tests/test_fem.py::test_prolongation_preserves_seminorm",
    "tests/test_adapt.py::test_bulk_marking_bulk_and_minimality",
    "tests/test_adapt.py::test_afem_deterministic_and_valid",
]


def test_criterion_7_property_suites():
    root = os.path.dirname(HERE)
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           *PROPERTY_SELECTION], cwd=root, capture_output=True, text=True)
    dt = time.perf_counter() - t0
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    ok = proc.returncode == 0 and dt < 60
    assert report(7, ok, f"property suites {tail} in {dt:.1f} s (<60 s)")
