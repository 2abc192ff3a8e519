import math

import numpy as np
import pytest

from quadeq import counterexample as cx
from quadeq.mathieu import find_qstar, mathieu_ode_residual
from quadeq.quadratic import polarize, witness_from_collision


@pytest.fixture(scope="module")
def qstar():
    return find_qstar(tol=1e-12)


@pytest.fixture(scope="module")
def ce(qstar):
    return cx.build(qstar, n=129)


def test_p_profile():
    assert cx.p_profile(8.0, 0.0) == -16.0
    assert cx.p_profile(3.7, math.pi / 4) == pytest.approx(0.0, abs=1e-15)
    assert cx.p_profile(8.5, math.pi / 2) == pytest.approx(17.0)


def test_grid_nodes():
    g = cx.Grid2D(9)
    assert g.nodes[0] == -math.pi / 2 and g.nodes[-1] == math.pi / 2
    assert g.h == pytest.approx(math.pi / 8)
    np.testing.assert_allclose(np.diff(g.nodes), g.h, rtol=1e-14)
    with pytest.raises(ValueError):
        cx.Grid2D(4)


def test_grid_function_validation():
    g = cx.Grid2D(5)
    with pytest.raises(cx.GridMismatch):
        cx.GridFunction2D(g, np.zeros((4, 5)))
    with pytest.raises(ValueError):
        cx.GridFunction2D(g, np.full((5, 5), np.nan))


def test_assemble_pair_boundary(qstar):
    u, v = cx.assemble_pair(qstar, grid=cx.Grid2D(65))
    plus, minus = cx.separable_pair(qstar)
    for f, s in ((u, plus), (v, minus)):
        assert np.max(np.abs(f.boundary())) <= 1e-14
        assert np.max(np.abs(f.boundary())) <= 1e-14 * np.sum(np.abs(s.xpart.coeffs))


def test_assemble_pair_midline(ce):
    j0 = ce.grid.n // 2
    assert ce.grid.nodes[j0] == 0.0
    np.testing.assert_array_equal(ce.u.values[:, j0], ce.plus.xpart(ce.grid.nodes))


def test_assemble_pair_distinct(ce):
    assert np.max(np.abs(ce.u.values - ce.v.values)) >= 0.05
    assert np.max(np.abs(ce.u.values + ce.v.values)) >= 0.05


def test_assemble_pair_rejects_wrong_q():
    with pytest.raises(ValueError):
        cx.assemble_pair(8.0)


def test_symmetry(ce):
    u = ce.u.values
    np.testing.assert_allclose(u[::-1, :], -u, atol=1e-15)
    np.testing.assert_allclose(u[:, ::-1], u, atol=1e-15)


def test_separated_equations(ce, qstar):
    # Laplace(u) + p u = 0 and Laplace(v) - p v = 0
    X, _ = ce.grid.mesh()
    p = cx.p_profile(qstar, X)
    assert np.max(np.abs((ce.lap_u.values + p * ce.u.values)[1:-1, 1:-1])) <= 1e-9
    assert np.max(np.abs((ce.lap_v.values - p * ce.v.values)[1:-1, 1:-1])) <= 1e-9


def test_analytic_laplacian_matches_ode_residual(ce):
    x = ce.grid.nodes
    j = 40
    expected = mathieu_ode_residual(ce.plus.xpart, -1.0, x) * math.cos(x[j])
    # Laplace(u) + p u at column j is the Mathieu residual times cos y_j
    lhs = ce.lap_u.values[:, j] + cx.p_profile(ce.qstar, x) * ce.u.values[:, j]
    np.testing.assert_allclose(lhs, expected, atol=1e-12)


def test_analytic_laplacian_zero_on_y_edges(ce):
    assert np.max(np.abs(ce.lap_u.values[:, [0, -1]])) <= 1e-14


def test_fd_laplacian_constant_and_quadratic():
    g = cx.Grid2D(17)
    one = g.sample(lambda X, Y: np.ones_like(X))
    assert np.max(np.abs(cx.fd_laplacian(one).interior())) == 0.0
    x2 = g.sample(lambda X, Y: X * X)
    np.testing.assert_allclose(cx.fd_laplacian(x2).interior(), 2.0, atol=1e-11)
    assert np.all(cx.fd_laplacian(x2).boundary() == 0.0)


def test_fd_laplacian_second_order(qstar):
    errs = []
    for n in (65, 129):
        c = cx.build(qstar, n=n)
        errs.append(np.max(np.abs(cx.fd_laplacian(c.u).interior() - c.lap_u.interior())))
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_annihilation_analytic(ce):
    rep = cx.verify_bilinear_annihilation(ce.u, ce.v, ce.lap_u, ce.lap_v, tol=1e-8)
    assert rep.passed
    assert rep.max_abs <= 1e-8
    assert rep.max_abs >= rep.rms >= 0
    assert rep.grid_n == 129


def test_annihilation_zero_grids():
    g = cx.Grid2D(9)
    z = cx.GridFunction2D(g, np.zeros((9, 9)))
    rep = cx.verify_bilinear_annihilation(z, z, z, z, tol=1e-8)
    assert rep.max_abs == 0.0 and rep.rms == 0.0


def test_annihilation_fd_order(qstar):
    res = []
    for n in (65, 129):
        c = cx.build(qstar, n=n)
        rep = cx.verify_bilinear_annihilation(c.u, c.v, cx.fd_laplacian(c.u), cx.fd_laplacian(c.v))
        res.append(rep.max_abs)
    assert 3.5 < res[0] / res[1] < 4.5


def test_grid_mismatch(ce):
    other = cx.GridFunction2D(cx.Grid2D(9), np.zeros((9, 9)))
    with pytest.raises(cx.GridMismatch):
        cx.verify_bilinear_annihilation(ce.u, other, ce.lap_u, ce.lap_v)


def test_equal_rhs_collision_pair(ce):
    a, b, la, lb = ce.collision()
    rep = cx.verify_equal_rhs(a, b, la, lb, tol=1e-8)
    assert rep.passed
    assert rep.max_abs <= 1e-8
    assert rep.dist_minus >= 0.05 and rep.dist_plus >= 0.05
    # a - b = 2v and a + b = 2u
    assert rep.dist_minus == pytest.approx(2 * ce.v.sup())
    assert rep.dist_plus == pytest.approx(2 * ce.u.sup())


def test_equal_rhs_is_twice_the_annihilation_residual(ce):
    # a Lap a - b Lap b = 2 (u Lap v + v Lap u) for a = u + v, b = u - v
    a, b, la, lb = ce.collision()
    g_diff = a.values * la.values - b.values * lb.values
    ann = ce.u.values * ce.lap_v.values + ce.v.values * ce.lap_u.values
    np.testing.assert_allclose(g_diff, 2 * ann, atol=1e-13)


def test_equal_rhs_guards(ce):
    same = cx.verify_equal_rhs(ce.u, ce.u, ce.lap_u, ce.lap_u)
    assert same.max_abs == 0.0
    assert same.dist_minus == 0.0 and not same.passed
    neg = cx.GridFunction2D(ce.grid, -ce.u.values)
    lneg = cx.GridFunction2D(ce.grid, -ce.lap_u.values)
    flipped = cx.verify_equal_rhs(ce.u, neg, ce.lap_u, lneg)
    assert flipped.dist_plus == 0.0 and not flipped.passed


def test_uncoupled_pair_does_not_collide(ce):
    # u and v themselves are B-orthogonal, not a collision
    rep = cx.verify_equal_rhs(ce.u, ce.v, ce.lap_u, ce.lap_v)
    assert rep.max_abs > 1.0 and not rep.passed


def test_norm_L_simple():
    g = cx.Grid2D(33)
    assert cx.norm_L(cx.GridFunction2D(g, np.zeros((33, 33)))) == 0.0
    assert cx.norm_L(g.sample(lambda X, Y: X)) == pytest.approx(math.pi / 2 + 1, abs=1e-12)


def test_norm_L_refinement(qstar):
    a = cx.norm_L(cx.build(qstar, n=129).u)
    b = cx.norm_L(cx.build(qstar, n=257).u)
    assert 0 < a < np.inf
    assert abs(a - b) / b <= 0.01


def test_bridge_to_quadratic_core(qstar):
    # flatten the collision pair, recover the witness, polarize the discrete Q
    c = cx.build(qstar, n=65)
    a, b, _, _ = c.collision(fd=True)
    U, V = witness_from_collision(a.values.ravel(), b.values.ravel())
    np.testing.assert_allclose(U, c.u.values.ravel(), atol=1e-15)
    np.testing.assert_allclose(V, c.v.values.ravel(), atol=1e-15)
    Q = cx.discrete_quadratic(c.grid)
    pol = polarize(Q, U, V)
    gap = Q(a.values.ravel()) - Q(b.values.ravel())
    assert np.max(np.abs(pol)) <= 0.25 * np.max(np.abs(gap)) + 1e-12
    # the discrete gap is the stencil error, well below the size of g itself
    fd_rep = cx.verify_bilinear_annihilation(c.u, c.v, cx.fd_laplacian(c.u), cx.fd_laplacian(c.v))
    assert np.max(np.abs(pol)) <= 0.5 * fd_rep.max_abs + 1e-12
    assert np.max(np.abs(pol)) <= 1e-2 * np.max(np.abs(Q(a.values.ravel())))


def test_report_to_dict_field_names(ce):
    rep = cx.verify_bilinear_annihilation(ce.u, ce.v, ce.lap_u, ce.lap_v)
    d = rep.to_dict()
    for key in ("max_abs", "rms", "norm_L_u", "norm_L_v", "dist_minus", "dist_plus", "grid_n"):
        assert key in d
