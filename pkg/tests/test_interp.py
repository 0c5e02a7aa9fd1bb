import numpy as np
import pytest

from layerfem.femspace import FeSpace
from layerfem.interp import (VecInterpolator, _reference_solve, gl_interpolate,
                             identity_discrepancy, remainder_R, vec_interpolate)
from layerfem.mesh import build_mesh_2d, uniform_mesh_2d
from layerfem.polyquad import gauss_legendre_rule, legendre
from layerfem.problem import make_manufactured_problem
from layerfem.study import IDENTITY_FUNCTIONS


@pytest.fixture(scope="module")
def mesh():
    return build_mesh_2d(4, 4.5, 1e-3, 2.0, 3.0)


def sin_g(x, y):
    return np.sin(x + 2 * y)


@pytest.mark.parametrize("p", [1, 2, 3, 4, 5])
def test_reproduces_constants(mesh, p):
    f = vec_interpolate(lambda x, y: np.ones_like(x), FeSpace(mesh, p))
    assert np.allclose(f.coeffs, 1.0, atol=1e-13)


@pytest.mark.parametrize("p", [2, 3, 4])
def test_reproduces_qp(mesh, p):
    g = lambda x, y: (x**p - 0.3 * x) * (y**p + 2 * y) + x * y  # noqa: E731
    sp = FeSpace(mesh, p)
    f = vec_interpolate(g, sp)
    X, Y = sp.dof_coords
    assert np.max(np.abs(f.coeffs - g(X, Y))) < 1e-11


@pytest.mark.parametrize("p", [2, 3, 5])
def test_edge_moments_preserved(mesh, p):
    sp = FeSpace(mesh, p)
    f = vec_interpolate(sin_g, sp, qm=p + 6)
    rule = gauss_legendre_rule(p + 6)
    px, py = mesh.mesh_x.points, mesh.mesh_y.points
    worst = 0.0
    for i in range(mesh.shape[0]):
        for j in range(mesh.shape[1]):
            s = rule.nodes
            x = px[i] + 0.5 * (s + 1) * (px[i + 1] - px[i])
            for yv in (py[j], py[j + 1]):
                d = f(x, np.full_like(x, yv)) - sin_g(x, yv)
                for k in range(p - 1):
                    worst = max(worst, abs(np.dot(rule.weights, d * legendre(k, s))))
    assert worst < 1e-10


def test_vertex_values_and_conformity(mesh, rng):
    sp = FeSpace(mesh, 3)
    vi = VecInterpolator(3)
    local = vi.local_coefficients(sin_g, sp)
    # every global DOF receives identical values from all cells sharing it
    for g in rng.choice(sp.ndofs, 60, replace=False):
        cells, loc = np.nonzero(sp.cell_dofs == g)
        vals = local[cells, loc]
        assert np.ptp(vals) < 1e-13
    px, py = mesh.mesh_x.points, mesh.mesh_y.points
    f = vi(sin_g, sp)
    assert f(px[2], py[1]) == pytest.approx(sin_g(px[2], py[1]), abs=1e-14)


def test_reference_solve_conditioned():
    for p in (1, 2, 3, 4, 5, 6):
        assert np.all(np.isfinite(_reference_solve(p)))


def test_gl_interpolant_keeps_boundary_values(mesh):
    sp = FeSpace(mesh, 3)
    f = gl_interpolate(lambda x, y: 1 + x + y, sp)
    X, Y = sp.dof_coords
    assert np.allclose(f.coeffs, 1 + X + Y)


@pytest.mark.parametrize("N", [4, 8])
@pytest.mark.parametrize("name", sorted(IDENTITY_FUNCTIONS))
def test_basic_identity(N, name):
    m = build_mesh_2d(N, 4.5, 1e-6, 2.0, 3.0)
    d = identity_discrepancy(IDENTITY_FUNCTIONS[name], FeSpace(m, 3), FeSpace(m, 4))
    assert d < 1e-11


def test_identity_in_remainder_form(mesh):
    sp, sp1 = FeSpace(mesh, 3), FeSpace(mesh, 4)
    qm = 8
    I = gl_interpolate(sin_g, sp)
    pi = vec_interpolate(sin_g, sp, qm)
    R = remainder_R(sin_g, sp, sp1, qm)
    assert np.max(np.abs(I.coeffs - (pi.coeffs + R.coeffs))) < 1e-11


def test_remainder_vanishes_on_qp(mesh):
    g = lambda x, y: x**3 * y**2 - y  # noqa: E731
    R = remainder_R(g, FeSpace(mesh, 3), FeSpace(mesh, 4))
    assert np.max(np.abs(R.coeffs)) < 1e-12


def test_remainder_rejects_mesh_mismatch(mesh):
    with pytest.raises(ValueError):
        remainder_R(sin_g, FeSpace(mesh, 3), FeSpace(uniform_mesh_2d(4), 4))
    with pytest.raises(ValueError):
        remainder_R(sin_g, FeSpace(mesh, 3), FeSpace(mesh, 3))


def test_stability_constant():
    eps = 1e-6
    m = build_mesh_2d(8, 4.5, eps, 2.0, 3.0)
    sp = FeSpace(m, 3)
    prob = make_manufactured_problem(eps)
    corpus = list(IDENTITY_FUNCTIONS.values()) + [
        prob.exact, prob.exact.E12, prob.exact.E21, prob.exact.E22,
        lambda x, y: np.exp(-2 * x / eps) + np.exp(-3 * y / eps)]
    s = np.linspace(0, 1, 41)
    X, Y = np.meshgrid(np.concatenate((s, m.mesh_x.points)), np.concatenate((s, m.mesh_y.points)))
    worst = 0.0
    for g in corpus:
        gmax = max(np.max(np.abs(g(X, Y))), np.max(np.abs(g(*sp.dof_coords))))
        for J in (gl_interpolate(g, sp), vec_interpolate(g, sp)):
            worst = max(worst, np.max(np.abs(J(X, Y))) / gmax)
    assert worst <= 5.0


def test_operators_are_projections(mesh):
    sp = FeSpace(mesh, 3)
    once = vec_interpolate(sin_g, sp)
    twice = vec_interpolate(lambda x, y: once(x, y), sp)
    assert np.max(np.abs(twice.coeffs - once.coeffs)) <= 1e-12
    g1 = gl_interpolate(sin_g, sp)
    g2 = gl_interpolate(lambda x, y: g1(x, y), sp)
    assert np.max(np.abs(g2.coeffs - g1.coeffs)) <= 1e-12
