"""Continuous Q_p spaces with Gauss-Lobatto nodal degrees of freedom.

Global numbering is lexicographic with x running fastest over the
(pNx + 1) x (pNy + 1) tensor grid of mapped Gauss-Lobatto points. The
solver relies on this: the half bandwidth of any assembled matrix is
p (pNx + 1) + p.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .mesh import Mesh1D, Mesh2D
from .polyquad import gauss_legendre_rule, gauss_lobatto_points, gl_lagrange_basis


def _glob_coords(points: np.ndarray, p: int) -> np.ndarray:
    t = gauss_lobatto_points(p)
    h = np.diff(points)
    inner = points[:-1, None] + 0.5 * (t[None, :-1] + 1.0) * h[:, None]
    out = np.concatenate((inner.ravel(), points[-1:]))
    out[::p] = points  # cell vertices bit-for-bit
    return out


class FeSpace1D:
    """Q_p on a 1D mesh; all pN + 1 nodal values, boundary ones constrained."""

    def __init__(self, mesh: Mesh1D, p: int):
        if p < 1:
            raise ValueError("p must be >= 1")
        self.mesh = mesh
        self.p = p
        self.basis = gl_lagrange_basis(p)
        self.ndofs = p * mesh.N + 1
        self.coords = _glob_coords(mesh.points, p)
        self.cell_dofs = p * np.arange(mesh.N)[:, None] + np.arange(p + 1)[None, :]
        self.boundary = np.zeros(self.ndofs, dtype=bool)
        self.boundary[[0, -1]] = True

    def interpolate(self, g, zero_boundary: bool = True) -> "FeFunction1D":
        vals = np.asarray(g(self.coords), dtype=float).copy()
        if zero_boundary:
            vals[self.boundary] = 0.0
        return FeFunction1D(self, vals)

    def function(self, coeffs=None) -> "FeFunction1D":
        if coeffs is None:
            coeffs = np.zeros(self.ndofs)
        return FeFunction1D(self, np.asarray(coeffs, dtype=float))

    def quadrature(self, q: int):
        """Physical points, weights and reference basis tables for q Gauss points per cell.

        Returns ``(x, w, B, dB)`` with ``x, w`` of shape (N, q) and
        ``B, dB`` of shape (N, q, p + 1), derivatives already in x.
        """
        rule = gauss_legendre_rule(q)
        h = self.mesh.widths
        x = self.mesh.points[:-1, None] + 0.5 * (rule.nodes[None, :] + 1.0) * h[:, None]
        w = 0.5 * h[:, None] * rule.weights[None, :]
        B = self.basis.values(rule.nodes)
        dB = self.basis.derivatives(rule.nodes)
        dB = dB[None, :, :] * (2.0 / h)[:, None, None]
        return x, w, np.broadcast_to(B, dB.shape), dB


@dataclass
class FeFunction1D:
    space: FeSpace1D
    coeffs: np.ndarray

    def _locate(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        cell = self.space.mesh.locate(x)
        pts = self.space.mesh.points
        h = pts[cell + 1] - pts[cell]
        t = 2.0 * (x - pts[cell]) / h - 1.0
        local = self.coeffs[self.space.cell_dofs[cell]]
        return t, h, local

    def __call__(self, x):
        t, _, local = self._locate(x)
        return np.einsum("nk,nk->n", self.space.basis.values(t), local)

    def deriv(self, x):
        t, h, local = self._locate(x)
        return np.einsum("nk,nk->n", self.space.basis.derivatives(t), local) * 2.0 / h

    def cell_values(self, q: int):
        """Values and derivatives at the q-point Gauss rule of each cell."""
        x, w, B, dB = self.space.quadrature(q)
        local = self.coeffs[self.space.cell_dofs]
        return x, w, np.einsum("nqk,nk->nq", B, local), np.einsum("nqk,nk->nq", dB, local)


class FeSpace:
    """Q_p on a tensor mesh with homogeneous Dirichlet constraints."""

    def __init__(self, mesh: Mesh2D, p: int):
        if p < 1:
            raise ValueError("p must be >= 1")
        self.mesh = mesh
        self.p = p
        self.basis = gl_lagrange_basis(p)
        nx, ny = mesh.shape
        self.nx_nodes = p * nx + 1
        self.ny_nodes = p * ny + 1
        self.ndofs = self.nx_nodes * self.ny_nodes
        self.xcoords = _glob_coords(mesh.mesh_x.points, p)
        self.ycoords = _glob_coords(mesh.mesh_y.points, p)

        ci, cj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
        a, b = np.meshgrid(np.arange(p + 1), np.arange(p + 1), indexing="xy")
        gx = p * ci.ravel()[:, None] + a.ravel()[None, :]
        gy = p * cj.ravel()[:, None] + b.ravel()[None, :]
        # cell c = j * Nx + i, local l = b * (p + 1) + a
        self.cell_dofs = gy * self.nx_nodes + gx

        ix = np.arange(self.nx_nodes)
        iy = np.arange(self.ny_nodes)
        IX, IY = np.meshgrid(ix, iy, indexing="xy")
        self.boundary = ((IX == 0) | (IX == self.nx_nodes - 1)
                         | (IY == 0) | (IY == self.ny_nodes - 1)).ravel()

    @property
    def n_interior(self) -> int:
        return int(np.count_nonzero(~self.boundary))

    @property
    def bandwidth(self) -> int:
        return self.p * self.nx_nodes + self.p

    @cached_property
    def dof_coords(self) -> tuple[np.ndarray, np.ndarray]:
        X, Y = np.meshgrid(self.xcoords, self.ycoords, indexing="xy")
        return X.ravel(), Y.ravel()

    def cell_ij(self, cell: int) -> tuple[int, int]:
        """1-based (i, j) of a flat cell index."""
        nx = self.mesh.shape[0]
        return cell % nx + 1, cell // nx + 1

    def function(self, coeffs=None) -> "FeFunction":
        if coeffs is None:
            coeffs = np.zeros(self.ndofs)
        return FeFunction(self, np.asarray(coeffs, dtype=float))

    def nodal_project(self, g, zero_boundary: bool = True) -> "FeFunction":
        """Gauss-Lobatto interpolation: DOF values are g at the mapped nodes."""
        X, Y = self.dof_coords
        vals = np.array(np.broadcast_to(g(X, Y), X.shape), dtype=float)
        if zero_boundary:
            vals[self.boundary] = 0.0
        return FeFunction(self, vals)

    def same_mesh(self, other: "FeSpace") -> bool:
        return (np.array_equal(self.mesh.mesh_x.points, other.mesh.mesh_x.points)
                and np.array_equal(self.mesh.mesh_y.points, other.mesh.mesh_y.points))

    def quadrature(self, q: int) -> "CellQuadrature":
        return CellQuadrature(self.mesh, q)


@dataclass
class CellQuadrature:
    """Tensor Gauss-Legendre points of every cell, flattened per cell.

    ``x, y, w`` have shape (n_cells, q*q); point k = ky * q + kx.
    """

    mesh: Mesh2D
    q: int
    x: np.ndarray = field(init=False)
    y: np.ndarray = field(init=False)
    w: np.ndarray = field(init=False)
    hx: np.ndarray = field(init=False)
    hy: np.ndarray = field(init=False)

    def __post_init__(self):
        rule = gauss_legendre_rule(self.q)
        px, py = self.mesh.mesh_x.points, self.mesh.mesh_y.points
        hx, hy = np.diff(px), np.diff(py)
        nx, ny = self.mesh.shape
        ci = np.tile(np.arange(nx), ny)
        cj = np.repeat(np.arange(ny), nx)
        tx = np.tile(rule.nodes, self.q)
        ty = np.repeat(rule.nodes, self.q)
        wr = np.outer(rule.weights, rule.weights).ravel()
        self.hx, self.hy = hx[ci], hy[cj]
        self.x = px[ci][:, None] + 0.5 * (tx[None, :] + 1.0) * self.hx[:, None]
        self.y = py[cj][:, None] + 0.5 * (ty[None, :] + 1.0) * self.hy[:, None]
        self.w = 0.25 * (self.hx * self.hy)[:, None] * wr[None, :]
        self.tx, self.ty = tx, ty

    def tables(self, p: int):
        """Reference tables (q*q, (p+1)^2): values, d/dtx, d/dty."""
        basis = gl_lagrange_basis(p)
        qx = gauss_legendre_rule(self.q).nodes
        V, D = basis.values(qx), basis.derivatives(qx)
        # point k = ky*q + kx, local l = b*(p+1) + a
        B = np.einsum("xa,yb->yxba", V, V).reshape(self.q**2, (p + 1) ** 2)
        Bx = np.einsum("xa,yb->yxba", D, V).reshape(self.q**2, (p + 1) ** 2)
        By = np.einsum("xa,yb->yxba", V, D).reshape(self.q**2, (p + 1) ** 2)
        return B, Bx, By


@dataclass
class FeFunction:
    space: FeSpace
    coeffs: np.ndarray

    def copy(self) -> "FeFunction":
        return FeFunction(self.space, self.coeffs.copy())

    def __sub__(self, other: "FeFunction") -> "FeFunction":
        if other.space is not self.space:
            raise ValueError("functions live in different spaces")
        return FeFunction(self.space, self.coeffs - other.coeffs)

    def __add__(self, other: "FeFunction") -> "FeFunction":
        if other.space is not self.space:
            raise ValueError("functions live in different spaces")
        return FeFunction(self.space, self.coeffs + other.coeffs)

    def _local(self, x, y):
        sp = self.space
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        x, y = np.broadcast_arrays(x, y)
        mx, my = sp.mesh.mesh_x, sp.mesh.mesh_y
        i, j = mx.locate(x), my.locate(y)
        hx = mx.points[i + 1] - mx.points[i]
        hy = my.points[j + 1] - my.points[j]
        tx = 2.0 * (x - mx.points[i]) / hx - 1.0
        ty = 2.0 * (y - my.points[j]) / hy - 1.0
        cell = j * mx.N + i
        local = self.coeffs[sp.cell_dofs[cell]].reshape(-1, sp.p + 1, sp.p + 1)
        return tx.ravel(), ty.ravel(), hx.ravel(), hy.ravel(), local, x.shape

    def __call__(self, x, y):
        tx, ty, _, _, local, shape = self._local(x, y)
        bas = self.space.basis
        val = np.einsum("na,nb,nba->n", bas.values(tx), bas.values(ty), local)
        return val.reshape(shape)

    def grad(self, x, y):
        tx, ty, hx, hy, local, shape = self._local(x, y)
        bas = self.space.basis
        Vx, Vy = bas.values(tx), bas.values(ty)
        Dx, Dy = bas.derivatives(tx), bas.derivatives(ty)
        gx = np.einsum("na,nb,nba->n", Dx, Vy, local) * 2.0 / hx
        gy = np.einsum("na,nb,nba->n", Vx, Dy, local) * 2.0 / hy
        return gx.reshape(shape), gy.reshape(shape)

    def cell_values(self, quad: CellQuadrature):
        """Value and gradient at every cell quadrature point, each (n_cells, q*q)."""
        B, Bx, By = quad.tables(self.space.p)
        local = self.coeffs[self.space.cell_dofs]
        val = local @ B.T
        gx = (local @ Bx.T) * (2.0 / quad.hx)[:, None]
        gy = (local @ By.T) * (2.0 / quad.hy)[:, None]
        return val, gx, gy


def sample_grid_csv(f, m: int, path: str | Path) -> None:
    """Sample ``f`` on a uniform m x m grid of [0, 1]^2 and write x, y, value."""
    t = np.linspace(0.0, 1.0, m)
    X, Y = np.meshgrid(t, t, indexing="xy")
    vals = np.asarray(f(X.ravel(), Y.ravel())).ravel()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "value"])
        for xv, yv, v in zip(X.ravel(), Y.ravel(), vals):
            w.writerow([f"{xv:.12g}", f"{yv:.12g}", f"{v:.12g}"])
