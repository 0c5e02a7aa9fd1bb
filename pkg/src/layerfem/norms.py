"""Energy and L2 error measurement and convergence orders."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .femspace import CellQuadrature, FeFunction
from .mesh import REGIONS


@dataclass(frozen=True)
class ErrorReport:
    """Norms of an error e: l2 = |e|_0, h1_semi = |grad e|_0,
    energy = sqrt(eps h1_semi^2 + l2^2), plus the same per subregion."""

    l2: float
    h1_semi: float
    energy: float
    eps: float
    regions: dict = field(default_factory=dict)

    @classmethod
    def from_squares(cls, l2sq, h1sq, eps, region_sq=None):
        regions = {}
        for name, (a, b) in (region_sq or {}).items():
            regions[name] = cls(math.sqrt(a), math.sqrt(b), math.sqrt(eps * b + a), eps)
        return cls(math.sqrt(l2sq), math.sqrt(h1sq), math.sqrt(eps * h1sq + l2sq),
                   eps, regions)


def _report(quad: CellQuadrature, e0, ex, ey, eps: float) -> ErrorReport:
    l2c = np.sum(quad.w * e0**2, axis=1)
    h1c = np.sum(quad.w * (ex**2 + ey**2), axis=1)
    rmap = quad.mesh.region_map().ravel()
    region_sq = {r: (float(np.sum(l2c[rmap == r])), float(np.sum(h1c[rmap == r])))
                 for r in REGIONS}
    return ErrorReport.from_squares(float(np.sum(l2c)), float(np.sum(h1c)), eps, region_sq)


def error_vs_exact(f: FeFunction, g, eps: float, q: int | None = None) -> ErrorReport:
    """Norms of f - g; ``g`` is callable with a ``grad`` method."""
    p = f.space.p
    q = p + 5 if q is None else q
    if q < p + 3:
        raise ValueError(f"need q >= p+3 = {p + 3}")
    quad = f.space.quadrature(q)
    v, vx, vy = f.cell_values(quad)
    gv = g(quad.x, quad.y)
    gx, gy = g.grad(quad.x, quad.y)
    return _report(quad, v - gv, vx - gx, vy - gy, eps)


def error_between(f1: FeFunction, f2: FeFunction, eps: float,
                  q: int | None = None) -> ErrorReport:
    """Norms of f1 - f2 for two functions of the same space (exact quadrature)."""
    if f1.space is not f2.space:
        raise ValueError("functions live in different spaces")
    q = f1.space.p + 1 if q is None else q
    quad = f1.space.quadrature(q)
    d = FeFunction(f1.space, f1.coeffs - f2.coeffs)
    return _report(quad, *d.cell_values(quad), eps)


def error_combination(terms, eps: float, q: int, exact=None) -> ErrorReport:
    """Norms of sum(s_k f_k) - exact for FeFunctions on one mesh, maybe of different degree.

    ``terms`` is a sequence of (sign, FeFunction).
    """
    mesh = terms[0][1].space.mesh
    quad = CellQuadrature(mesh, q)
    e0 = np.zeros_like(quad.x)
    ex = np.zeros_like(quad.x)
    ey = np.zeros_like(quad.x)
    for s, fun in terms:
        if not fun.space.same_mesh(terms[0][1].space):
            raise ValueError("all functions must share the mesh")
        v, vx, vy = fun.cell_values(quad)
        e0 += s * v
        ex += s * vx
        ey += s * vy
    if exact is not None:
        e0 -= exact(quad.x, quad.y)
        gx, gy = exact.grad(quad.x, quad.y)
        ex -= gx
        ey -= gy
    return _report(quad, e0, ex, ey, eps)


def observed_order(errors, Ns, log_adjusted: bool = False) -> list[float]:
    """Rates between consecutive entries, measured against 1/N or ln(N)/N."""
    errors = [float(e) for e in errors]
    if len(errors) != len(Ns):
        raise ValueError("errors and Ns differ in length")
    if any(e <= 0 for e in errors):
        raise ValueError("errors must be positive")
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("Ns must increase")
    m = [math.log(N) / N if log_adjusted else 1.0 / N for N in Ns]
    return [math.log(errors[k] / errors[k + 1]) / math.log(m[k] / m[k + 1])
            for k in range(len(errors) - 1)]


def fitted_order(errors, Ns, log_adjusted: bool = False) -> float:
    """Least-squares slope of ln(error) against ln(mesh quantity) over all points."""
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0):
        raise ValueError("errors must be positive")
    Ns = np.asarray(Ns, dtype=float)
    m = np.log(Ns) / Ns if log_adjusted else 1.0 / Ns
    slope, _ = np.polyfit(np.log(m), np.log(errors), 1)
    return float(slope)
