"""Hierarchical Legendre representation of 1D piecewise Q_p functions.

A continuous piecewise polynomial v of odd degree p with v(0) = v(1) = 0 is
written as

    v = sum_i v_i phi_i + sum_{k,i} w_i^{2k+1} psi_{2k+1,i} + sum_{k,j} y_j^{2k} chi_{2k,j}

with hats phi_i, one-cell even bubbles chi_{2k,j} and two-cell bubbles
psi_{2k+1,i} that are even about x_i (odd on each of their two cells);
psi_{2k+1,N} is the left half mapped onto the last cell. Integer indices
below are 1-based like the mesh nodes x_0 .. x_N.

On cell m with local coordinate s in [-1, 1] this reads

    v = linear part + sum_k y_m^{2k} (1 - L_{2k}(s)) / 2
                    + sum_k (w_{m-1}^{2k+1} - w_m^{2k+1}) G_{2k+1}(s),

G_n(s) = (L_1(s) - L_n(s)) / 2, w_0 = 0, which is what the decomposition
and reconstruction use.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .femspace import FeFunction1D, FeSpace1D
from .mesh import Mesh1D, ShishkinMesh1D
from .polyquad import gauss_legendre_rule, gauss_lobatto_points, legendre, legendre_all


def phi_hat(t):
    return 1.0 - np.abs(t)


def chi_hat(n: int, t):
    """Even bubble of degree n on [0, 1]."""
    return 0.5 * (1.0 - legendre(n, 2 * np.asarray(t) - 1))


def psi_hat(n: int, t):
    """Odd-degree bubble on [-1, 1], even in t."""
    s = 2 * np.abs(t) - 1
    return 0.5 * (legendre(1, s) - legendre(n, s))


class HierBasis:
    """Global hierarchical basis on a 1D mesh for odd p >= 3."""

    def __init__(self, mesh: Mesh1D, p: int):
        if p < 3 or p % 2 == 0:
            raise ValueError("hierarchical basis needs odd p >= 3")
        self.mesh = mesh
        self.p = p
        self.K = (p - 1) // 2
        self.x = mesh.points
        self.h = mesh.widths
        self.N = mesh.N

    # global basis functions, evaluated through the reference maps

    def _inside(self, x, a, b):
        x = np.asarray(x, dtype=float)
        return (x >= a) & (x <= b), x

    def F_inv(self, i: int, x):
        """Inverse of the piecewise linear map of [-1, 1] onto [x_{i-1}, x_{i+1}]."""
        x = np.asarray(x, dtype=float)
        xi = self.x[i]
        left = (x - xi) / self.h[i - 1]
        right = (x - xi) / self.h[i] if i < self.N else left
        return np.where(x <= xi, left, right)

    def phi(self, i: int, x):
        m, x = self._inside(x, self.x[i - 1], self.x[min(i + 1, self.N)])
        return np.where(m, phi_hat(self.F_inv(i, x)), 0.0)

    def chi(self, k: int, j: int, x):
        m, x = self._inside(x, self.x[j - 1], self.x[j])
        return np.where(m, chi_hat(2 * k, (x - self.x[j - 1]) / self.h[j - 1]), 0.0)

    def psi(self, k: int, i: int, x):
        if i == self.N:
            m, x = self._inside(x, self.x[i - 1], self.x[i])
        else:
            m, x = self._inside(x, self.x[i - 1], self.x[i + 1])
        return np.where(m, psi_hat(2 * k + 1, self.F_inv(i, x)), 0.0)

    # per-cell machinery

    def cell_rule(self, q: int | None = None):
        """Gauss points (N, q), weights (N, q) and local coordinates (q,)."""
        rule = gauss_legendre_rule(self.p + 2 if q is None else q)
        x = self.x[:-1, None] + 0.5 * (rule.nodes[None, :] + 1) * self.h[:, None]
        w = 0.5 * self.h[:, None] * rule.weights[None, :]
        return x, w, rule.nodes

    def even_denominators(self) -> np.ndarray:
        """int L_{2k}^j chi_{2k,j} over cell j, shape (K, N)."""
        _, w, s = self.cell_rule()
        out = np.empty((self.K, self.N))
        for k in range(1, self.K + 1):
            Ls = legendre(2 * k, s)
            out[k - 1] = w @ (Ls * 0.5 * (1 - Ls))
        return out

    def odd_denominators(self) -> np.ndarray:
        """int L_{2k+1}^i psi_{2k+1,i} over cell i, shape (K, N)."""
        _, w, s = self.cell_rule()
        out = np.empty((self.K, self.N))
        for k in range(1, self.K + 1):
            Ls = legendre(2 * k + 1, s)
            out[k - 1] = w @ (Ls * -0.5 * (legendre(1, s) - Ls))
        return out


@dataclass
class HierRepresentation:
    v: np.ndarray  # (N-1,) nodal values at x_1 .. x_{N-1}
    y: np.ndarray  # (K, N) even-bubble coefficients, row k-1 <-> degree 2k
    w: np.ndarray  # (K, N) odd-bubble coefficients, row k-1 <-> degree 2k+1

    @property
    def size(self) -> int:
        return self.v.size + self.y.size + self.w.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate((self.v, self.y.ravel(), self.w.ravel()))


def _cell_values(v: FeFunction1D, x: np.ndarray) -> np.ndarray:
    return v(x.ravel()).reshape(x.shape)


def decompose(v: FeFunction1D, basis: HierBasis, tol: float = 1e-12) -> HierRepresentation:
    if not np.array_equal(v.space.mesh.points, basis.x):
        raise ValueError("function and basis live on different meshes")
    scale = max(1.0, float(np.max(np.abs(v.coeffs))))
    if abs(v.coeffs[0]) > tol * scale or abs(v.coeffs[-1]) > tol * scale:
        raise ValueError("v must vanish at both end points")
    p = v.space.p
    nodal = v.coeffs[::p][1:-1].copy()
    x, w, s = basis.cell_rule()
    vals = _cell_values(v, x)
    ev, od = basis.even_denominators(), basis.odd_denominators()
    y = np.empty((basis.K, basis.N))
    wc = np.empty((basis.K, basis.N))
    for k in range(1, basis.K + 1):
        y[k - 1] = (w * vals) @ legendre(2 * k, s) / ev[k - 1]
        # N_{2k+1}^m v; their running sum telescopes to w_i
        n_odd = (w * vals) @ legendre(2 * k + 1, s) / od[k - 1]
        wc[k - 1] = np.cumsum(n_odd)
    return HierRepresentation(nodal, y, wc)


def _cell_combination(rep: HierRepresentation, basis: HierBasis, s: np.ndarray):
    """Values of the representation at local coordinates s on every cell, (N, len(s))."""
    vv = np.concatenate(([0.0], rep.v, [0.0]))
    out = (vv[:-1, None] * 0.5 * (1 - s)[None, :] + vv[1:, None] * 0.5 * (1 + s)[None, :])
    L = legendre_all(basis.p, s)
    for k in range(1, basis.K + 1):
        out += rep.y[k - 1][:, None] * (0.5 * (1 - L[2 * k]))[None, :]
        wprev = np.concatenate(([0.0], rep.w[k - 1][:-1]))
        G = 0.5 * (L[1] - L[2 * k + 1])
        out += (wprev - rep.w[k - 1])[:, None] * G[None, :]
    return out


def reconstruct(rep: HierRepresentation, basis: HierBasis) -> FeFunction1D:
    """Piecewise Q_p function (Gauss-Lobatto nodal form) of the representation."""
    space = FeSpace1D(basis.mesh, basis.p)
    t = gauss_lobatto_points(basis.p)
    vals = _cell_combination(rep, basis, t)
    coeffs = np.empty(space.ndofs)
    coeffs[space.cell_dofs] = vals
    coeffs[space.cell_dofs[:, 0]] = np.concatenate(([0.0], rep.v))
    coeffs[-1] = 0.0
    return FeFunction1D(space, coeffs)


def evaluate_sum(rep: HierRepresentation, basis: HierBasis, x) -> np.ndarray:
    """Evaluate the representation as a literal sum of global basis functions."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for i in range(1, basis.N):
        out += rep.v[i - 1] * basis.phi(i, x)
    for k in range(1, basis.K + 1):
        for j in range(1, basis.N + 1):
            out += rep.y[k - 1, j - 1] * basis.chi(k, j, x)
            out += rep.w[k - 1, j - 1] * basis.psi(k, j, x)
    return out


def cross_products(rep: HierRepresentation, basis: HierBasis) -> tuple[float, float]:
    """Closed forms of (sum v_i phi_i, sum chi terms) and (sum v_i phi_i, psi_N terms).

    A hat against any even bubble on one of its cells integrates to h/4 and
    against the last-cell odd bubble to h/12, for every bubble degree, since
    the linear part is orthogonal to L_n for n >= 2. With p = 3 only degrees
    2 and 3 occur.
    """
    h, v = basis.h, rep.v
    y = rep.y.sum(axis=0)
    a = 0.25 * float(np.sum(v * (h[:-1] * y[:-1] + h[1:] * y[1:])))
    b = v[-1] * float(rep.w[:, -1].sum()) * h[-1] / 12.0
    return a, float(b)


def _inner(f, g, basis: HierBasis, q: int | None = None) -> float:
    x, w, _ = basis.cell_rule(q)
    return float(np.sum(w * f(x) * g(x)))


def cross_products_quadrature(rep: HierRepresentation, basis: HierBasis):
    """The same two inner products evaluated by cellwise Gauss quadrature."""
    K = basis.K

    def hats(x):
        return sum(rep.v[i - 1] * basis.phi(i, x) for i in range(1, basis.N))

    def chis(x):
        return sum(rep.y[k - 1, j - 1] * basis.chi(k, j, x)
                   for k in range(1, K + 1) for j in range(1, basis.N + 1))

    def last(x):
        return sum(rep.w[k - 1, -1] * basis.psi(k, basis.N, x) for k in range(1, K + 1))

    return _inner(hats, chis, basis), _inner(hats, last, basis)


class EtaTilde:
    """Frozen-coefficient interpolation error model on [x_{i-1}, x_{i+1}].

    On each of the two cells it is S^(p+1)(x_i) / (p+1)! times the nodal
    polynomial of the mapped Gauss-Lobatto points of that cell.
    """

    def __init__(self, basis: HierBasis, i: int, dS: float, left_only: bool = False):
        self.basis = basis
        self.i = i
        self.coef = dS / math.factorial(basis.p + 1)
        t = gauss_lobatto_points(basis.p)
        cells = [i] if left_only or i == basis.N else [i, i + 1]
        self.polys = {}
        for m in cells:
            a, h = basis.x[m - 1], basis.h[m - 1]
            roots = a + 0.5 * (t + 1) * h
            roots[0], roots[-1] = basis.x[m - 1], basis.x[m]
            P = np.polynomial.Polynomial.fromroots(roots)
            self.polys[m] = (P, P.deriv())

    def _eval(self, x, which):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for m, pair in self.polys.items():
            lo, hi = self.basis.x[m - 1], self.basis.x[m]
            mask = (x >= lo) & (x <= hi) if m == min(self.polys) else (x > lo) & (x <= hi)
            out = np.where(mask, self.coef * pair[which](x), out)
        return out

    def __call__(self, x):
        return self._eval(x, 0)

    def deriv(self, x):
        return self._eval(x, 1)


def build_eta_tilde(i: int, dS: float, basis: HierBasis) -> EtaTilde:
    """eta~_i for node i = 1 .. N-1 with frozen derivative value S^(p+1)(x_i)."""
    if not 1 <= i <= basis.N - 1:
        raise ValueError("eta~ is defined for interior nodes")
    return EtaTilde(basis, i, dS)


def energy_norm_1d(v: FeFunction1D, eps: float) -> float:
    _, w, val, der = v.cell_values(v.space.p + 1)
    return math.sqrt(eps * float(np.sum(w * der**2)) + float(np.sum(w * val**2)))


def gl_interpolant_1d(S, mesh: Mesh1D, p: int) -> FeFunction1D:
    return FeSpace1D(mesh, p).interpolate(S, zero_boundary=False)


def convective_diagnostics(S, v: FeFunction1D, basis: HierBasis, prob,
                           q: int | None = None) -> dict:
    """Split of int b (S - S^)' v into the terms I, II, III, IV.

    ``S`` needs ``deriv(k, x)`` for k <= p+1. I is the eta~ contribution of
    the node N/2 where two cell sizes meet, II and III the frozen-coefficient
    remainders against the psi/phi and chi parts, IV the last-cell psi_N
    term. ``parity`` collects the eta~ terms that vanish by symmetry, so
    total = I + II + III + IV + parity.
    """
    p, N = basis.p, basis.N
    q = p + 6 if q is None else q
    Shat = gl_interpolant_1d(S, basis.mesh, p)
    rep = decompose(v, basis)
    x, w, s = basis.cell_rule(q)
    b = np.broadcast_to(prob.b(x), x.shape)
    eta = S(x) - _cell_values(Shat, x)
    deta = S.deriv(1, x) - Shat.deriv(x.ravel()).reshape(x.shape)
    vals = _cell_values(v, x)
    total = float(np.sum(w * b * deta * vals))

    def a_part(i, xx):
        out = rep.v[i - 1] * basis.phi(i, xx)
        for k in range(1, basis.K + 1):
            out = out + rep.w[k - 1, i - 1] * basis.psi(k, i, xx)
        return out

    def c_part(j, xx):
        return sum(rep.y[k - 1, j - 1] * basis.chi(k, j, xx) for k in range(1, basis.K + 1))

    I = II = III = parity = 0.0
    for i in range(1, N):
        cells = [i - 1, i]
        xi = basis.x[i]
        bi = float(np.asarray(prob.b(np.array([xi])))[0])
        et = EtaTilde(basis, i, float(S.deriv(p + 1, xi)))
        for c in cells:
            xx = x[c]
            A = a_part(i, xx)
            det = et.deriv(xx)
            frozen = float(np.sum(w[c] * bi * det * A))
            rest = float(np.sum(w[c] * ((b[c] - bi) * deta[c] + bi * (deta[c] - det)) * A))
            II += rest
            if i == N // 2 and isinstance(basis.mesh, ShishkinMesh1D):
                I += frozen
            else:
                parity += frozen
    for j in range(1, N + 1):
        c = j - 1
        xx = x[c]
        xj = basis.x[j]
        bj = float(np.asarray(prob.b(np.array([xj])))[0])
        et = EtaTilde(basis, j, float(S.deriv(p + 1, xj)), left_only=True)
        C = c_part(j, xx)
        det = et.deriv(xx)
        parity += float(np.sum(w[c] * bj * det * C))
        III += float(np.sum(w[c] * ((b[c] - bj) * deta[c] + bj * (deta[c] - det)) * C))
    psiN = sum(rep.w[k - 1, N - 1] * basis.psi(k, N, x[N - 1]) for k in range(1, basis.K + 1))
    IV = float(np.sum(w[N - 1] * b[N - 1] * deta[N - 1] * psiN))
    return {"total": total, "I": I, "II": II, "III": III, "II_III": II + III,
            "IV": IV, "parity": parity, "eta_l2": float(np.sqrt(np.sum(w * eta**2)))}


def verify_convective_bound(S, v: FeFunction1D, basis: HierBasis, prob) -> float:
    """|int b (S - S^)' v| / (N^-(p+1/4) ||v||_E)."""
    Shat = gl_interpolant_1d(S, basis.mesh, basis.p)
    x, w, _ = basis.cell_rule(basis.p + 6)
    b = np.broadcast_to(prob.b(x), x.shape)
    deta = S.deriv(1, x) - Shat.deriv(x.ravel()).reshape(x.shape)
    num = abs(float(np.sum(w * b * deta * _cell_values(v, x))))
    return num / (basis.N ** -(basis.p + 0.25) * energy_norm_1d(v, prob.eps))


def convective_dual_norm(S, space: FeSpace1D, prob) -> float:
    """sup over discrete v of |int b (S - S^)' v| / ||v||_E."""
    Shat = gl_interpolant_1d(S, space.mesh, space.p)
    q = space.p + 6
    x, w, B, dB = space.quadrature(q)
    b = np.broadcast_to(prob.b(x), x.shape)
    deta = S.deriv(1, x) - Shat.deriv(x.ravel()).reshape(x.shape)
    n = space.ndofs
    ell = np.zeros(n)
    np.add.at(ell, space.cell_dofs.ravel(), np.einsum("nq,nqk->nk", w * b * deta, B).ravel())
    x2, w2, B2, dB2 = space.quadrature(space.p + 1)
    loc = (prob.eps * np.einsum("nq,nqi,nqj->nij", w2, dB2, dB2)
           + np.einsum("nq,nqi,nqj->nij", w2, B2, B2))
    G = np.zeros((n, n))
    d = space.cell_dofs
    np.add.at(G, (d[:, :, None], d[:, None, :]), loc)
    free = ~space.boundary
    G, ell = G[np.ix_(free, free)], ell[free]
    return math.sqrt(float(ell @ np.linalg.solve(G, ell)))


def random_coarse_function(space: FeSpace1D, lam: float, rng) -> FeFunction1D:
    """Random nodal values on DOFs in (lam, 1), zero on [0, lam] and at 1."""
    coeffs = rng.standard_normal(space.ndofs)
    coeffs[space.coords <= lam] = 0.0
    coeffs[-1] = 0.0
    return FeFunction1D(space, coeffs)


def write_diagnostics_csv(rows: list[dict], path: str | Path) -> None:
    if not rows:
        raise ValueError("no rows to write")
    cols = list(rows[0])
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(cols)
        for r in rows:
            wr.writerow([f"{r[c]:.12g}" if isinstance(r[c], float) else r[c] for c in cols])
