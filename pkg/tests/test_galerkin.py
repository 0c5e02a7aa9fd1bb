import numpy as np
import pytest

from layerfem import galerkin
from layerfem.femspace import FeSpace
from layerfem.femspace import CellQuadrature
from layerfem.mesh import Mesh1D, Mesh2D, build_mesh_2d, uniform_mesh_2d
from layerfem.norms import error_between
from layerfem.problem import LayerProblem, make_manufactured_problem


def _const_problem(eps=1.0, b=(0.0, 0.0), c=0.0, f=0.0):
    return LayerProblem(
        eps=eps,
        b=lambda x, y: (np.full(np.shape(x), b[0]), np.full(np.shape(x), b[1])),
        c=lambda x, y: np.full(np.shape(x), c),
        gamma=c, beta1=1.0, beta2=1.0,
        f=lambda x, y: np.full(np.shape(x), f), exact=None, name="const")


def test_bilinear_stiffness_stencil():
    sp = FeSpace(uniform_mesh_2d(2), 1)
    sys = galerkin.assemble(sp, _const_problem(), eliminate_bc=False)
    A = sys.matrix.to_dense()
    centre = 4
    assert A[centre, centre] == pytest.approx(8 / 3)
    for nb in (0, 1, 2, 3, 5, 6, 7, 8):
        assert A[centre, nb] == pytest.approx(-1 / 3)
    # corner node touches one cell
    assert A[0, 0] == pytest.approx(2 / 3)
    assert A[0, 1] == pytest.approx(-1 / 6)
    assert A[0, 4] == pytest.approx(-1 / 3)
    assert np.allclose(A.sum(axis=1), 0.0, atol=1e-14)


def test_zero_load_gives_zero_rhs():
    sp = FeSpace(uniform_mesh_2d(4), 3)
    sys = galerkin.assemble(sp, _const_problem(c=1.0))
    assert not sys.rhs.any()


def test_boundary_rows_eliminated():
    sp = FeSpace(uniform_mesh_2d(4), 2)
    sys = galerkin.assemble(sp, _const_problem(c=1.0, f=1.0))
    A = sys.matrix.to_dense()
    for k in np.flatnonzero(sp.boundary):
        row = A[k].copy()
        assert row[k] == 1.0
        row[k] = 0.0
        assert not row.any()
        col = A[:, k].copy()
        col[k] = 0.0
        assert not col.any()


def test_quadrature_order_guard():
    sp = FeSpace(uniform_mesh_2d(2), 3)
    with pytest.raises(ValueError):
        galerkin.assemble(sp, _const_problem(), q=4)


@pytest.fixture(scope="module")
def solved():
    eps = 1e-6
    prob = make_manufactured_problem(eps)
    sp = FeSpace(build_mesh_2d(8, 4.5, eps, 2.0, 3.0), 3)
    return prob, sp, galerkin.solve(galerkin.assemble(sp, prob))


def test_coercivity(solved, rng):
    prob, sp, _ = solved
    for _ in range(20):
        c = rng.standard_normal(sp.ndofs)
        c[sp.boundary] = 0.0
        v = sp.function(c)
        a = galerkin.bilinear(v, v, prob)
        e = error_between(v, sp.function(), prob.eps).energy
        assert a >= min(1.0, prob.gamma) * e**2 * (1 - 1e-10)


def _graded(m, eps):
    """Mesh points plus a geometric grading that resolves e^{-x/eps} past the transition."""
    # the fine cells resolve the layer already; only the first coarse cell needs help
    lam = m.points[m.N // 2]
    extra = [m.points, lam + eps * np.geomspace(0.25, 2**40, 43)]
    pts = np.unique(np.concatenate(extra))
    return Mesh1D(pts[pts <= 1.0])


def _a_exact_fe(u, v, prob, quad):
    """a(u, v) with u an exact field and v a FeFunction evaluated pointwise."""
    ux, uy = u.grad(quad.x, quad.y)
    v0 = v(quad.x, quad.y)
    vx, vy = v.grad(quad.x, quad.y)
    b1, b2 = prob.b(quad.x, quad.y)
    integrand = prob.eps * (ux * vx + uy * vy) + (u(quad.x, quad.y) - b1 * ux - b2 * uy) * v0
    return float(np.sum(quad.w * integrand))


def test_galerkin_orthogonality(solved, rng):
    prob, sp, uh = solved
    m = sp.mesh
    fine = CellQuadrature(Mesh2D(_graded(m.mesh_x, prob.eps), _graded(m.mesh_y, prob.eps)), 8)
    for _ in range(10):
        c = rng.standard_normal(sp.ndofs)
        c[sp.boundary] = 0.0
        v = sp.function(c)
        lhs = _a_exact_fe(prob.exact, v, prob, fine)
        rhs = galerkin.bilinear(uh, v, prob, q=10)
        assert abs(lhs - rhs) <= 1e-7


def test_discrete_equation(solved, rng):
    prob, sp, uh = solved
    c = rng.standard_normal(sp.ndofs)
    c[sp.boundary] = 0.0
    v = sp.function(c)
    assert galerkin.bilinear(uh, v, prob) == pytest.approx(
        galerkin.load(prob.f, v, q=6), rel=1e-9, abs=1e-12)


def test_backends_give_same_solution(solved):
    prob, sp, uh = solved
    sys = galerkin.assemble(sp, prob)
    sys.matrix.backend = "python"
    u2 = galerkin.solve(sys)
    assert np.max(np.abs(u2.coeffs - uh.coeffs)) < 1e-11


def test_singular_system_reports_cell():
    sp = FeSpace(uniform_mesh_2d(2), 1)
    sys = galerkin.assemble(sp, _const_problem(eps=0.0, c=0.0))
    with pytest.raises(galerkin.NumericalFailure, match="cells"):
        galerkin.solve(sys)


def test_quadrature_refinement_stable(solved):
    prob, sp, uh = solved
    u2 = galerkin.solve(galerkin.assemble(sp, prob, q=8))
    d = error_between(uh, sp.function(u2.coeffs), prob.eps).energy
    assert d < 1e-6 * error_between(uh, sp.function(), prob.eps).energy


def test_assembly_quadrature_stable_smooth_data():
    prob = _const_problem(eps=0.1, b=(1.0, 0.5), c=1.0, f=1.0)
    sp = FeSpace(uniform_mesh_2d(6), 3)
    u2 = galerkin.solve(galerkin.assemble(sp, prob, q=5))
    u4 = galerkin.solve(galerkin.assemble(sp, prob, q=7))
    e2 = error_between(u2, sp.function(), 0.1).energy
    d = error_between(u2, sp.function(u4.coeffs), 0.1).energy
    assert d / e2 < 1e-8
