import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from fracfem.errors import InvalidState, SolverFailure
from fracfem.fem import (FESpace, Fracture, ProblemSpec, assemble_area_source,
                         assemble_line_source, assemble_stiffness, assemble_stiffness_full,
                         build_space, constant, convergence_rate, energy_error, evaluate,
                         gradient_on, h1_seminorm, h1_seminorm_diff, interpolate, powerlaw,
                         prolongate, solve_problem, solve_spd)
from fracfem.fem.assembly import local_stiffness
from fracfem.fem.problem import sin_exact_grad, sin_source, tabulated
from fracfem.fem.space import basis_gradients
from fracfem.geometry import make_segment
from fracfem.harness.scenarios import CASES, get_scenario
from fracfem.mesh import (bisect, build_fracture_conforming, build_unit_square_unionjack,
                          red_refine, unit_square)
from fracfem.quadrature import gauss_triangle
from helpers import GAMMA, constant_spec, randomly_bisected, scenario_mesh, two_triangles, \
    unit_triangle


# -- spaces ------------------------------------------------------------------

def test_dof_counts():
    m = two_triangles()
    s1 = build_space(m, 1)
    assert s1.dof_count == 4 and s1.dirichlet_mask.all()
    s2 = build_space(m, 2)
    assert s2.dof_count == 9
    assert (~s2.dirichlet_mask).sum() == 1       # the diagonal midpoint
    assert build_space(build_unit_square_unionjack(2), 1).dof_count == 13
    with pytest.raises(ValueError):
        FESpace(m, 3)


@given(st.integers(0, 10**6))
def test_dirichlet_mask_matches_boundary(seed):
    m = randomly_bisected(build_fracture_conforming(unit_square(), (GAMMA,), 4), seed, 2)
    for k in (1, 2):
        s = FESpace(m, k)
        X = s.node_coords
        on = (np.isclose(X[:, 0], 0) | np.isclose(X[:, 0], 1) | np.isclose(X[:, 1], 0)
              | np.isclose(X[:, 1], 1))
        np.testing.assert_array_equal(s.dirichlet_mask, on)


# -- stiffness ---------------------------------------------------------------

def test_reference_stiffness():
    K = local_stiffness(FESpace(unit_triangle(), 1))[0]
    np.testing.assert_allclose(K, [[1, -0.5, -0.5], [-0.5, 0.5, 0], [-0.5, 0, 0.5]], atol=1e-15)


def test_p2_stiffness_quadrature_oracle():
    s = FESpace(unit_triangle(), 2)
    K2 = local_stiffness(s)[0]
    G, area = s.grad_lambda
    rule = gauss_triangle(6)
    dphi = basis_gradients(2, rule.points, G)
    K6 = 2 * area[0] * np.einsum("q,qid,qjd->ij", rule.weights, dphi[0], dphi[0])
    np.testing.assert_allclose(K2, K6, atol=1e-14)
    # known P2 reference stiffness entries
    assert abs(K2[0, 0] - 1.0) < 1e-14 and abs(K2[1, 1] - 0.5) < 1e-14
    assert abs(K2[3, 3] - 8 / 3) < 1e-14


@given(st.integers(0, 10**6), st.sampled_from([1, 2]))
def test_stiffness_row_sums_and_symmetry(seed, k):
    m = randomly_bisected(build_fracture_conforming(unit_square(), (GAMMA,), 4), seed, 3)
    s = FESpace(m, k)
    K = assemble_stiffness_full(s)
    assert np.abs(K.sum(axis=1)).max() < 1e-12
    assert abs(K - K.T).max() < 1e-14
    A = assemble_stiffness(s)
    assert A.shape == (len(s.free),) * 2
    assert A.diagonal().min() > 0


# -- line source -------------------------------------------------------------

def test_line_source_single_edge():
    seg = make_segment((0.25, 0.5), (0.5, 0.5))
    spec = constant_spec(1.0, seg)
    m = build_fracture_conforming(unit_square(), (seg,), 4)
    s = FESpace(m, 1)
    b = assemble_line_source(s, spec.fractures)
    i = int(np.argmin(np.hypot(*(m.vertices - [0.25, 0.5]).T)))
    j = int(np.argmin(np.hypot(*(m.vertices - [0.5, 0.5]).T)))
    assert abs(b[i] - 0.125) < 1e-15 and abs(b[j] - 0.125) < 1e-15
    b[[i, j]] = 0
    assert not b.any()
    z = assemble_line_source(s, constant_spec(0.0, seg).fractures)
    assert not z.any()


def test_conforming_mode_needs_tiling():
    spec = constant_spec()
    s = FESpace(build_unit_square_unionjack(1, (GAMMA,)), 1)
    with pytest.raises(InvalidState):
        assemble_line_source(s, spec.fractures, "conforming")
    b = assemble_line_source(s, spec.fractures, "clipped")
    assert abs(b.sum() - 0.5) < 1e-14


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("name", [f"case{i}" for i in CASES] + ["geometry3", "lshape_loop"])
def test_clipped_equals_conforming(name, k):
    sc, m = scenario_mesh(name)
    m = red_refine(m)
    s = FESpace(m, k)
    a = assemble_line_source(s, sc.spec.fractures, "conforming")
    b = assemble_line_source(s, sc.spec.fractures, "clipped")
    assert np.abs(a - b).max() <= 1e-12


@given(st.integers(0, 10**6), st.sampled_from([1, 2]), st.sampled_from(["case1", "geometry2"]))
def test_clipped_equals_conforming_on_bisected_meshes(seed, k, name):
    sc, m = scenario_mesh(name)
    m = randomly_bisected(m, seed, 3)
    s = FESpace(m, k)
    a = assemble_line_source(s, sc.spec.fractures, "conforming")
    b = assemble_line_source(s, sc.spec.fractures, "clipped")
    assert np.abs(a - b).max() <= 1e-12


def test_line_source_total_matches_integral_of_g():
    # sum of basis functions is 1, so sum(b) is the integral of g; the graded
    # rule leaves about 5e-5 relative error at the r0 < 0 endpoints
    r0, r1 = CASES[1]
    exact = 0.5 ** (2 * r0 + 1) * math.gamma(r0 + 1) ** 2 / math.gamma(2 * r0 + 2) + 0.5 * r1
    for name, want, tol in (("case1", exact, 1e-4), ("case3", 1.0, 1e-14)):
        sc, m = scenario_mesh(name)
        for k in (1, 2):
            b = assemble_line_source(FESpace(m, k), sc.spec.fractures, "conforming")
            assert abs(b.sum() - want) < tol * want


# -- area source -------------------------------------------------------------

def test_area_source_examples():
    m = build_fracture_conforming(unit_square(), (), 4)
    s = FESpace(m, 1)
    assert not assemble_area_source(s, lambda x, y: 0 * x).any()
    b = assemble_area_source(s, lambda x, y: np.ones_like(x))
    for v in np.flatnonzero(~s.dirichlet_mask):
        patch = m.areas[np.any(m.triangles == v, axis=1)].sum()
        assert abs(b[v] - patch / 3) < 1e-15
    m = red_refine(red_refine(m))
    for k in (1, 2):
        s = FESpace(m, k)
        b = assemble_area_source(s, sin_source)
        assert abs(b.sum() - 8.0) < 1e-6
        assert abs(b[s.free].sum() - 8.0) < 0.05 * 8.0


# -- solver ------------------------------------------------------------------

def test_solver_examples():
    d = np.linspace(1, 5, 50)
    b = np.cos(np.arange(50.0))
    np.testing.assert_allclose(solve_spd(sp.diags(d), b), b / d, rtol=1e-12)
    n = 150
    T = sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]).tocsr()
    rhs = np.sin(np.arange(n) / 7.0)
    x = solve_spd(T, rhs, rtol=1e-12)
    xd = np.linalg.solve(T.toarray(), rhs)
    assert np.linalg.norm(T @ x - rhs) <= 1e-12 * np.linalg.norm(rhs)
    assert np.abs(x - xd).max() <= 1e-8 * np.abs(xd).max()
    assert not solve_spd(T, np.zeros(n)).any()
    with pytest.raises(ValueError):
        solve_spd(T, rhs, rtol=1e-3)
    with pytest.raises(ValueError):
        solve_spd(T, rhs, precond="ilu")


def test_solver_failure_carries_residual():
    rng = np.random.default_rng(1)
    n = 200
    Q = np.linalg.qr(rng.standard_normal((n, n)))[0]
    A = Q @ np.diag(np.linspace(-1, 1, n) + 1e-3) @ Q.T
    A += np.diag(np.full(n, 1e-6) - np.minimum(np.diag(A), 0))
    with pytest.raises(SolverFailure) as exc:
        solve_spd(sp.csr_matrix(A), rng.standard_normal(n), rtol=1e-12)
    assert exc.value.residual > 1e-12 and exc.value.iterations > 0


@pytest.mark.parametrize("precond", ["jacobi", "amg"])
def test_galerkin_residual(precond):
    sc, m = scenario_mesh("case1")
    s = FESpace(red_refine(m), 2)
    sol = solve_problem(s, sc.spec, rtol=1e-12, precond=precond)
    b = assemble_line_source(s, sc.spec.fractures)[s.free]
    r = assemble_stiffness(s) @ sol.coeffs[s.free] - b
    assert np.abs(r).max() <= 1e-12 * np.linalg.norm(b)
    assert not sol.coeffs[s.dirichlet_mask].any()


# -- prolongation and functionals -------------------------------------------

@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("refine", ["red", "bisect"])
def test_prolongation_exactness(k, refine):
    sc, m = scenario_mesh("case3")
    fine = red_refine(m) if refine == "red" else bisect(m, np.arange(0, m.nt, 2))
    one = interpolate(FESpace(m, k), lambda x, y: np.ones_like(x))
    np.testing.assert_array_equal(prolongate(one, FESpace(fine, k)).coeffs, 1.0)
    u = interpolate(FESpace(m, k), lambda x, y: x * x + 3 * x * y - y if k == 2 else 2 * x - y)
    p = prolongate(u, FESpace(fine, k))
    X = p.space.node_coords
    want = X[:, 0] ** 2 + 3 * X[:, 0] * X[:, 1] - X[:, 1] if k == 2 else 2 * X[:, 0] - X[:, 1]
    assert np.abs(p.coeffs - want).max() < 1e-14


@given(st.integers(0, 10**6), st.sampled_from([1, 2]))
def test_prolongation_preserves_seminorm(seed, k):
    sc, m = scenario_mesh("case3")
    fine = randomly_bisected(m, seed, 1)
    rng = np.random.default_rng(seed)
    s = FESpace(m, k)
    u = interpolate(s, lambda x, y: 0 * x)
    u.coeffs[s.free] = rng.standard_normal(len(s.free))
    p = prolongate(u, FESpace(fine, k))
    assert abs(h1_seminorm(p) - h1_seminorm(u)) <= 1e-13 * h1_seminorm(u)


def test_prolongation_rejects_unrelated_meshes():
    sc, m = scenario_mesh("case3")
    u = interpolate(FESpace(m, 1), lambda x, y: x)
    with pytest.raises(ValueError, match="not nested"):
        prolongate(u, FESpace(red_refine(red_refine(m)), 1))
    with pytest.raises(ValueError, match="not nested"):
        prolongate(u, FESpace(build_unit_square_unionjack(3), 1))
    v = interpolate(FESpace(build_fracture_conforming(unit_square(), (GAMMA,), 4,
                                                      "alternating"), 1), lambda x, y: x)
    with pytest.raises(ValueError, match="not nested"):
        prolongate(v, FESpace(red_refine(m), 1))


def test_hat_seminorm_and_diff():
    m = build_fracture_conforming(unit_square(), (), 4)
    s = FESpace(m, 1)
    c = int(np.argmin(np.hypot(*(m.vertices - 0.5).T)))
    hat = interpolate(s, lambda x, y: 0 * x)
    hat.coeffs[c] = 1.0
    zero = interpolate(s, lambda x, y: 0 * x)
    K = assemble_stiffness_full(s)
    assert abs(h1_seminorm_diff(hat, zero) - math.sqrt(K[c, c])) < 1e-15
    assert abs(K[c, c] - 4.0) < 1e-14             # diagonal-pattern hat: 4 for any h
    twice = interpolate(s, lambda x, y: 0 * x)
    twice.coeffs[c] = 2.0
    assert abs(h1_seminorm_diff(twice, zero) - 2 * h1_seminorm_diff(hat, zero)) < 1e-15
    assert h1_seminorm_diff(hat, hat) == 0.0
    with pytest.raises(ValueError):
        h1_seminorm_diff(hat, interpolate(FESpace(m, 2), lambda x, y: 0 * x))


def test_convergence_rate_examples():
    assert convergence_rate(0.2, 0.1) == 1.0
    assert convergence_rate(0.2, 0.2) == 0.0
    assert abs(convergence_rate(1.0, 2 ** -0.5) - 0.5) < 1e-15
    for bad in ((0.0, 1.0), (1.0, -1.0)):
        with pytest.raises(ValueError):
            convergence_rate(*bad)


@pytest.mark.parametrize("k", [1, 2])
def test_evaluate_and_gradients(k):
    sc, m = scenario_mesh("case3")
    s = FESpace(m, k)
    for i in (7, s.ndof - 1):
        e = interpolate(s, lambda x, y: 0 * x)
        e.coeffs[i] = 1.0
        assert abs(evaluate(e, s.node_coords[i]) - 1.0) < 1e-14
    u = interpolate(s, lambda x, y: x)
    for t in range(m.nt):
        np.testing.assert_allclose(gradient_on(u, t), [[1, 0]] * 3, atol=1e-13)
    with pytest.raises(ValueError, match="outside"):
        evaluate(u, (1.5, 0.5))


def test_p1_gradient_matches_finite_differences():
    sc, m = scenario_mesh("case3")
    s = FESpace(m, 1)
    rng = np.random.default_rng(3)
    u = interpolate(s, lambda x, y: 0 * x)
    u.coeffs[:] = rng.standard_normal(s.ndof)
    for t in (0, 5, 17):
        c = m.tri_xy[t].mean(axis=0)
        h = 1e-6
        fd = [(evaluate(u, c + [h, 0]) - evaluate(u, c - [h, 0])) / (2 * h),
              (evaluate(u, c + [0, h]) - evaluate(u, c - [0, h])) / (2 * h)]
        np.testing.assert_allclose(gradient_on(u, t)[0], fd, atol=1e-7)


def test_coefficient_validation():
    with pytest.raises(ValueError):
        powerlaw("x", 0.25, 0.75, -0.5, 1)
    with pytest.raises(ValueError):
        powerlaw("z", 0.25, 0.75, 0, 1)
    with pytest.raises(ValueError):
        tabulated("x", [0, 0], [1, 2])
    g = tabulated("y", [0, 1], [1, 3])
    assert g(0.2, 0.5) == 2.0
    with pytest.raises(ValueError):
        ProblemSpec(unit_square(), (Fracture(make_segment((0.5, 0.5), (1.5, 0.5)),
                                             constant(1)),))


def test_symmetry_on_mirror_symmetric_mesh():
    sc = get_scenario("case3")
    m = red_refine(build_fracture_conforming(unit_square(), sc.spec.segments, 4, "alternating"))
    for k in (1, 2):
        s = FESpace(m, k)
        sol = solve_problem(s, sc.spec)
        X = s.node_coords
        key = {(round(x, 12), round(y, 12)): i for i, (x, y) in enumerate(X)}
        mirror = np.array([key[(round(1 - x, 12), round(y, 12))] for x, y in X])
        flip = np.array([key[(round(x, 12), round(1 - y, 12))] for x, y in X])
        scale = np.abs(sol.coeffs).max()
        assert np.abs(sol.coeffs - sol.coeffs[mirror]).max() <= 1e-10 * scale
        assert np.abs(sol.coeffs - sol.coeffs[flip]).max() <= 1e-10 * scale


def test_manufactured_rates_small():
    sc = get_scenario("manufactured_sin")
    for k, want in ((1, 1.0), (2, 2.0)):
        m = build_fracture_conforming(unit_square(), (), 4)
        errs = []
        for _ in range(4):
            sol = solve_problem(FESpace(m, k), sc.spec)
            errs.append(energy_error(sol, sin_exact_grad))
            m = red_refine(m)
        assert abs(convergence_rate(errs[-2], errs[-1]) - want) < 0.1 * want
