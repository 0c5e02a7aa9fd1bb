"""Assembly and direct solution of the Galerkin system.

    a(v, w) = eps (grad v, grad w) + (c v - b . grad v, w)

is integrated cellwise with tensor Gauss-Legendre rules; the right-hand side
uses the same rule. Dirichlet rows and columns are eliminated in place.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .banded import BandedMatrix, SingularMatrixError
from .femspace import CellQuadrature, FeFunction, FeSpace


class NumericalFailure(RuntimeError):
    """The linear solve failed or did not meet its residual bound."""


@dataclass
class GalerkinSystem:
    matrix: BandedMatrix
    rhs: np.ndarray
    space: FeSpace
    q: int
    problem: object = None
    _data0: np.ndarray | None = None


def default_quad_order(p: int) -> int:
    return p + 3


def _coef(fun, x, y):
    return np.broadcast_to(np.asarray(fun(x, y), dtype=float), x.shape)


def local_matrices(space: FeSpace, prob, quad: CellQuadrature):
    """Element matrices (n_cells, L, L), row index = test function."""
    B, Bx, By = quad.tables(space.p)
    sx = 2.0 / quad.hx
    sy = 2.0 / quad.hy
    b1, b2 = prob.b(quad.x, quad.y)
    b1 = np.broadcast_to(b1, quad.x.shape)
    b2 = np.broadcast_to(b2, quad.x.shape)
    c = _coef(prob.c, quad.x, quad.y)
    w = quad.w
    stiff = (np.einsum("ck,ki,kj->cij", w * (prob.eps * sx**2)[:, None], Bx, Bx)
             + np.einsum("ck,ki,kj->cij", w * (prob.eps * sy**2)[:, None], By, By))
    mass = np.einsum("ck,ki,kj->cij", w * c, B, B)
    conv = (np.einsum("ck,ki,kj->cij", w * b1 * sx[:, None], B, Bx)
            + np.einsum("ck,ki,kj->cij", w * b2 * sy[:, None], B, By))
    return stiff + mass - conv


def assemble(space: FeSpace, prob, q: int | None = None,
             eliminate_bc: bool = True) -> GalerkinSystem:
    p = space.p
    q = default_quad_order(p) if q is None else q
    if q < p + 2:
        raise ValueError(f"quadrature needs at least p+2={p + 2} points, got {q}")
    quad = space.quadrature(q)
    local = local_matrices(space, prob, quad)
    B, _, _ = quad.tables(p)
    f = _coef(prob.f, quad.x, quad.y)
    local_rhs = (quad.w * f) @ B

    dofs = space.cell_dofs
    L = dofs.shape[1]
    bw = space.bandwidth
    spread = np.max(dofs, axis=1) - np.min(dofs, axis=1)
    assert np.all(spread <= bw), "DOF numbering exceeds the declared bandwidth"
    A = BandedMatrix(space.ndofs, bw, bw)
    rows = np.broadcast_to(dofs[:, :, None], (len(dofs), L, L))
    cols = np.broadcast_to(dofs[:, None, :], (len(dofs), L, L))
    A.add(rows, cols, local)
    rhs = np.zeros(space.ndofs)
    np.add.at(rhs, dofs.ravel(), local_rhs.ravel())

    if eliminate_bc:
        for k in np.flatnonzero(space.boundary):
            A.zero_row(k)
            A.zero_col(k)
            A[k, k] = 1.0
        rhs[space.boundary] = 0.0
    return GalerkinSystem(A, rhs, space, q, prob)


def solve(system: GalerkinSystem, rtol: float = 1e-9) -> FeFunction:
    A = system.matrix
    if not A.factorized:
        system._data0 = A.data.copy()
        try:
            A.factorize()
        except SingularMatrixError as exc:
            cells = np.flatnonzero(np.any(system.space.cell_dofs == exc.index, axis=1))
            where = [system.space.cell_ij(c) for c in cells]
            raise NumericalFailure(
                f"singular pivot at DOF {exc.index} (cells {where})") from exc
    u = A.solve(system.rhs)
    if not np.all(np.isfinite(u)):
        raise NumericalFailure("non-finite solution")
    resid = _residual(system, u)
    scale = np.max(np.abs(system.rhs))
    if scale > 0 and resid / scale > rtol:
        raise NumericalFailure(f"relative residual {resid / scale:.3e} exceeds {rtol:g}")
    return FeFunction(system.space, u)


def _residual(system: GalerkinSystem, u: np.ndarray) -> float:
    A = system.matrix
    saved = A.data
    A.data = system._data0
    ipiv, A.ipiv = A.ipiv, None
    try:
        r = A.matvec(u) - system.rhs
    finally:
        A.data, A.ipiv = saved, ipiv
    return float(np.max(np.abs(r)))


def _values(obj, quad: CellQuadrature):
    if isinstance(obj, FeFunction):
        return obj.cell_values(quad)
    val = np.broadcast_to(obj(quad.x, quad.y), quad.x.shape)
    gx, gy = obj.grad(quad.x, quad.y)
    return val, np.broadcast_to(gx, quad.x.shape), np.broadcast_to(gy, quad.x.shape)


def bilinear(v, w, prob, mesh=None, q: int | None = None) -> float:
    """a(v, w) by direct quadrature; v, w are FeFunctions or exact fields."""
    fe = v if isinstance(v, FeFunction) else w
    mesh = fe.space.mesh if mesh is None else mesh
    q = fe.space.p + 3 if q is None else q
    quad = CellQuadrature(mesh, q)
    v0, vx, vy = _values(v, quad)
    w0, wx, wy = _values(w, quad)
    b1, b2 = prob.b(quad.x, quad.y)
    c = _coef(prob.c, quad.x, quad.y)
    integrand = (prob.eps * (vx * wx + vy * wy) + c * v0 * w0
                 - (b1 * vx + b2 * vy) * w0)
    return float(np.sum(quad.w * integrand))


def load(f, w: FeFunction, q: int | None = None) -> float:
    """(f, w) by quadrature."""
    q = w.space.p + 3 if q is None else q
    quad = w.space.quadrature(q)
    w0, _, _ = w.cell_values(quad)
    return float(np.sum(quad.w * f(quad.x, quad.y) * w0))
