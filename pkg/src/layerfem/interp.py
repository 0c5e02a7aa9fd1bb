"""Gauss-Lobatto and vertex-edge-cell interpolation into Q_p spaces.

The vertex-edge-cell operator on [-1, 1]^2 matches the four vertex values,
the moments against L_0 .. L_{p-2} on each edge and the moments against
L_a(s) L_b(t), a, b <= p - 2, on the cell. Since the functionals transform
affinely, the (p+1)^2 x (p+1)^2 map from functionals to Gauss-Lobatto
nodal values is computed once per degree and reused on every cell.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .femspace import FeFunction, FeSpace
from .polyquad import gauss_legendre_rule, gl_lagrange_basis, legendre_all

# reference edges as (fixed coordinate, fixed value): bottom, right, top, left
_EDGES = (("y", -1.0), ("x", 1.0), ("y", 1.0), ("x", -1.0))
_VERTICES = ((-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0))


def _functional_points(p: int, qm: int):
    """Reference points and weights for all functionals of degree p.

    Returns a list of (tx, ty, weights) blocks in functional order:
    vertices, then edges with p-1 moments each, then (p-1)^2 cell moments.
    Each block maps sampled values g(tx, ty) to functional values via
    ``weights @ g``.
    """
    rule = gauss_legendre_rule(qm)
    leg = legendre_all(max(p - 2, 0), rule.nodes)[: p - 1]  # (p-1, qm)
    blocks = []
    vx = np.array([v[0] for v in _VERTICES])
    vy = np.array([v[1] for v in _VERTICES])
    blocks.append((vx, vy, np.eye(4)))
    for axis, val in _EDGES:
        if p < 2:
            break
        s = rule.nodes
        fixed = np.full_like(s, val)
        tx, ty = (s, fixed) if axis == "y" else (fixed, s)
        blocks.append((tx, ty, leg * rule.weights[None, :]))
    if p >= 2:
        tx = np.tile(rule.nodes, qm)
        ty = np.repeat(rule.nodes, qm)
        wq = np.outer(rule.weights, rule.weights).ravel()
        # moment (a, b) -> row b*(p-1) + a
        L = np.einsum("ax,by->baxy", leg, leg).reshape((p - 1) ** 2, qm, qm)
        # sample k = ky*qm + kx
        W = np.transpose(L, (0, 2, 1)).reshape((p - 1) ** 2, qm * qm) * wq[None, :]
        blocks.append((tx, ty, W))
    return blocks


@lru_cache(maxsize=None)
def _reference_solve(p: int) -> np.ndarray:
    """Matrix mapping functional values to nodal values on the reference cell."""
    basis = gl_lagrange_basis(p)
    qm = p + 2  # exact for polynomial data of degree 2p - 2
    rows = []
    for tx, ty, W in _functional_points(p, qm):
        vals = np.einsum("ka,kb->kba", basis.values(tx), basis.values(ty))
        rows.append(W @ vals.reshape(len(tx), -1))
    F = np.vstack(rows)
    if F.shape != ((p + 1) ** 2, (p + 1) ** 2):
        raise RuntimeError("wrong number of functionals")
    cond = np.linalg.cond(F)
    if not np.isfinite(cond) or cond > 1e12:
        raise np.linalg.LinAlgError(f"singular functional system for p={p}")
    return np.linalg.inv(F)


@dataclass
class VecInterpolator:
    """Vertex-edge-cell interpolation of degree p with qm-point moment rules."""

    p: int
    qm: int | None = None
    solve_matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.qm is None:
            self.qm = self.p + 4
        self.solve_matrix = _reference_solve(self.p)

    def functionals(self, g, space: FeSpace) -> np.ndarray:
        """Functional values of g on every cell, shape (n_cells, (p+1)^2).

        Edge and cell moments are taken in reference coordinates, i.e. of
        g o F_tau on [-1, 1]^2.
        """
        mesh = space.mesh
        px, py = mesh.mesh_x.points, mesh.mesh_y.points
        nx, ny = mesh.shape
        x0 = np.tile(px[:-1], ny)
        y0 = np.repeat(py[:-1], nx)
        hx = np.tile(np.diff(px), ny)
        hy = np.repeat(np.diff(py), nx)
        ix = np.tile(np.arange(nx), ny)
        iy = np.repeat(np.arange(ny), nx)
        out = []
        for tx, ty, W in _functional_points(self.p, self.qm):
            X = x0[:, None] + 0.5 * (tx[None, :] + 1.0) * hx[:, None]
            Y = y0[:, None] + 0.5 * (ty[None, :] + 1.0) * hy[:, None]
            # exact right/top coordinates so neighbours sample identical points
            X = np.where(tx[None, :] == 1.0, px[ix + 1][:, None], X)
            Y = np.where(ty[None, :] == 1.0, py[iy + 1][:, None], Y)
            G = np.broadcast_to(g(X, Y), X.shape)
            out.append(G @ W.T)
        return np.hstack(out)

    def local_coefficients(self, g, space: FeSpace) -> np.ndarray:
        return self.functionals(g, space) @ self.solve_matrix.T

    def __call__(self, g, space: FeSpace) -> FeFunction:
        if space.p != self.p:
            raise ValueError(f"space degree {space.p} != interpolator degree {self.p}")
        local = self.local_coefficients(g, space)
        coeffs = np.zeros(space.ndofs)
        # shared vertex/edge values agree up to rounding; cell order fixes the writer
        coeffs[space.cell_dofs.ravel()] = local.ravel()
        return FeFunction(space, coeffs)


def vec_interpolate(g, space: FeSpace, qm: int | None = None) -> FeFunction:
    return VecInterpolator(space.p, qm)(g, space)


def gl_interpolate(g, space: FeSpace) -> FeFunction:
    """Gauss-Lobatto interpolation; boundary values are taken from g."""
    return space.nodal_project(g, zero_boundary=False)


def restrict_to(f: FeFunction, space: FeSpace) -> FeFunction:
    """Gauss-Lobatto interpolation of a discrete function into ``space``."""
    if not f.space.same_mesh(space):
        raise ValueError("spaces must share the mesh")
    X, Y = space.dof_coords
    return FeFunction(space, np.asarray(f(X, Y), dtype=float))


def remainder_R(g, space_p: FeSpace, space_p1: FeSpace,
                qm: int | None = None) -> FeFunction:
    """Discrete part I_p(g - pi_{p+1} g) of the remainder R g.

    R g itself is this minus the continuous tail g - pi_{p+1} g.
    """
    if space_p1.p != space_p.p + 1 or not space_p.same_mesh(space_p1):
        raise ValueError("need spaces of degree p and p+1 on one mesh")
    pi1 = vec_interpolate(g, space_p1, qm)
    X, Y = space_p.dof_coords
    return FeFunction(space_p, np.asarray(g(X, Y), dtype=float) - pi1(X, Y))


def identity_discrepancy(g, space_p: FeSpace, space_p1: FeSpace,
                         qm: int | None = None) -> float:
    """max |coeffs(pi_p g) - coeffs(I_p pi_{p+1} g)| with a shared moment rule."""
    qm = space_p1.p + 4 if qm is None else qm
    lhs = vec_interpolate(g, space_p, qm)
    rhs = restrict_to(vec_interpolate(g, space_p1, qm), space_p)
    return float(np.max(np.abs(lhs.coeffs - rhs.coeffs)))
