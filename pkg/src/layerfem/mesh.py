"""Piecewise uniform Shishkin meshes in 1D and their tensor products."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class MeshError(ValueError):
    """Inadmissible mesh parameters."""


@dataclass(frozen=True)
class Mesh1D:
    """Strictly increasing partition of [0, 1]."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts[0] != 0.0 or pts[-1] != 1.0 or np.any(np.diff(pts) <= 0):
            raise MeshError("mesh points must increase strictly from 0 to 1")
        object.__setattr__(self, "points", pts)

    @property
    def N(self) -> int:
        return len(self.points) - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.points)

    def locate(self, x) -> np.ndarray:
        """0-based index of the cell holding ``x``; ties go to the left cell."""
        idx = np.searchsorted(self.points, x, side="left") - 1
        return np.clip(idx, 0, self.N - 1)


@dataclass(frozen=True)
class ShishkinMesh1D(Mesh1D):
    sigma: float = 0.0
    eps: float = 0.0
    beta: float = 1.0
    lam: float = 0.5

    @property
    def fine_width(self) -> float:
        return 2 * self.lam / self.N

    @property
    def coarse_width(self) -> float:
        return 2 * (1 - self.lam) / self.N


def uniform_mesh_1d(N: int) -> Mesh1D:
    return Mesh1D(np.linspace(0.0, 1.0, N + 1))


def transition_point(N: int, sigma: float, eps: float, beta: float) -> float:
    return sigma * eps / beta * math.log(N)


def max_admissible_eps(N: int, sigma: float, beta: float) -> float:
    """Largest eps for which the layer-adapted regime is valid."""
    return beta / (2 * sigma * math.log(N))


def build_mesh_1d(N: int, sigma: float, eps: float, beta: float,
                  force: bool = False, beta_min: float | None = None) -> ShishkinMesh1D:
    """Shishkin mesh with N/2 fine cells on [0, lambda] and N/2 coarse cells.

    ``beta_min`` is the smaller layer strength when the mesh is one factor
    of a 2D mesh; the admissibility bound uses it. With ``force`` an
    inadmissible eps falls back to lambda = 1/2, i.e. a uniform mesh.
    """
    if N < 4 or N % 2:
        raise MeshError(f"N must be even and >= 4, got {N}")
    if eps <= 0 or sigma <= 0 or beta <= 0:
        raise MeshError("eps, sigma and beta must be positive")
    bound = max_admissible_eps(N, sigma, beta if beta_min is None else beta_min)
    lam = transition_point(N, sigma, eps, beta)
    if eps > bound or lam >= 0.5:
        if not force:
            raise MeshError(
                f"eps={eps:g} violates eps <= min(beta)/(2 sigma ln N) = {bound:g} "
                f"(N={N}, sigma={sigma:g}); lambda would be {lam:g}")
        lam = min(lam, 0.5)
    half = N // 2
    i = np.arange(N + 1)
    pts = np.where(i <= half, lam * 2 * i / N, 1 - 2 * (1 - lam) * (1 - i / N))
    pts[half] = lam
    pts[-1] = 1.0
    return ShishkinMesh1D(pts, sigma=sigma, eps=eps, beta=beta, lam=lam)


REGIONS = ("11", "12", "21", "22")


@dataclass(frozen=True)
class Mesh2D:
    """Tensor product mesh; cell (i, j) is [x_{i-1}, x_i] x [y_{j-1}, y_j]."""

    mesh_x: Mesh1D
    mesh_y: Mesh1D

    @property
    def shape(self) -> tuple[int, int]:
        return self.mesh_x.N, self.mesh_y.N

    @property
    def n_cells(self) -> int:
        return self.mesh_x.N * self.mesh_y.N

    @property
    def n_nodes(self) -> int:
        return (self.mesh_x.N + 1) * (self.mesh_y.N + 1)

    def region(self, i: int, j: int) -> str:
        """Subregion label of cell (i, j), 1-based indices.

        The first digit is 2 inside the fine y strip [0, lambda_y], 1 outside;
        the second digit likewise for x, so "12" is [0, lambda_x] x [lambda_y, 1].
        Without a Shishkin structure every cell counts as "11".
        """
        fine_x = isinstance(self.mesh_x, ShishkinMesh1D) and i <= self.mesh_x.N // 2
        fine_y = isinstance(self.mesh_y, ShishkinMesh1D) and j <= self.mesh_y.N // 2
        return f"{2 if fine_y else 1}{2 if fine_x else 1}"

    def region_map(self) -> np.ndarray:
        """Region labels as an ``(Ny, Nx)`` array, row j holds cells (., j+1)."""
        nx, ny = self.shape
        return np.array([[self.region(i + 1, j + 1) for i in range(nx)]
                         for j in range(ny)])

    def region_measure(self, label: str) -> float:
        hx, hy = self.mesh_x.widths, self.mesh_y.widths
        rmap = self.region_map()
        return float(np.sum(np.outer(hy, hx)[rmap == label]))


ShishkinMesh2D = Mesh2D


def build_mesh_2d(N: int, sigma: float, eps: float, beta1: float, beta2: float,
                  force: bool = False) -> Mesh2D:
    bmin = min(beta1, beta2)
    return Mesh2D(build_mesh_1d(N, sigma, eps, beta1, force, bmin),
                  build_mesh_1d(N, sigma, eps, beta2, force, bmin))


def uniform_mesh_2d(N: int) -> Mesh2D:
    m = uniform_mesh_1d(N)
    return Mesh2D(m, m)


def dump_mesh_csv(mesh: Mesh1D | Mesh2D, path) -> None:
    """Write node coordinates, one row per node index; ``path`` may be a stream."""
    if hasattr(path, "write"):
        _write_mesh(mesh, path)
        return
    with open(path, "w", newline="") as fh:
        _write_mesh(mesh, fh)


def _write_mesh(mesh: Mesh1D | Mesh2D, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    if isinstance(mesh, Mesh2D):
        w.writerow(["index", "x", "y"])
        xs, ys = mesh.mesh_x.points, mesh.mesh_y.points
        for k in range(max(len(xs), len(ys))):
            w.writerow([k,
                        f"{xs[k]:.17g}" if k < len(xs) else "",
                        f"{ys[k]:.17g}" if k < len(ys) else ""])
    else:
        w.writerow(["index", "x"])
        for k, x in enumerate(mesh.points):
            w.writerow([k, f"{x:.17g}"])
