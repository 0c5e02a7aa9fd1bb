"""Legendre polynomials, Gauss rules and nodal Lagrange bases on [-1, 1].

Every other module builds on these. All rules are computed in double
precision by Newton iteration; nothing here depends on scipy.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

_NEWTON_TOL = 1e-15
_NEWTON_MAXIT = 100


class QuadratureError(RuntimeError):
    """Raised when a root finder fails to converge."""


def legendre_all(kmax: int, t):
    """Values of L_0 .. L_kmax at ``t``; shape ``(kmax + 1,) + t.shape``."""
    t = np.asarray(t, dtype=float)
    out = np.empty((kmax + 1,) + t.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = t
    for k in range(1, kmax):
        out[k + 1] = ((2 * k + 1) * t * out[k] - k * out[k - 1]) / (k + 1)
    return out


def legendre_all_deriv(kmax: int, t):
    """Values and first derivatives of L_0 .. L_kmax at ``t``.

    Uses L'_{k+1} = L'_{k-1} + (2k+1) L_k, which is division free and
    therefore fine at t = +-1.
    """
    vals = legendre_all(kmax, t)
    der = np.zeros_like(vals)
    if kmax >= 1:
        der[1] = 1.0
    for k in range(1, kmax):
        der[k + 1] = der[k - 1] + (2 * k + 1) * vals[k]
    return vals, der


def legendre(k: int, t):
    """Legendre polynomial of degree ``k``, normalised so L_k(1) = 1."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    res = legendre_all(k, t)[k]
    return float(res) if np.ndim(res) == 0 else res


def legendre_deriv(k: int, t):
    res = legendre_all_deriv(k, t)[1][k]
    return float(res) if np.ndim(res) == 0 else res


@dataclass(frozen=True)
class QuadRule:
    """Quadrature rule on [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray
    exactness_degree: int

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def mapped(self, a: float, b: float):
        """Nodes and weights for the interval [a, b]."""
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights


def _newton(f_and_df, x0):
    x = np.array(x0, dtype=float)
    for _ in range(_NEWTON_MAXIT):
        f, df = f_and_df(x)
        dx = f / df
        x = x - dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            return x
    # a last step below tolerance in a few-ulp limit cycle is fine
    f, df = f_and_df(x)
    if np.max(np.abs(f / df)) < 1e-13:
        return x
    raise QuadratureError("Newton iteration did not converge")


@lru_cache(maxsize=None)
def _gauss_lobatto(p: int):
    if p < 1:
        raise ValueError("Gauss-Lobatto rule needs p >= 1")
    if p == 1:
        return np.array([-1.0, 1.0]), np.array([1.0, 1.0])
    # interior points are the roots of L_p'; L_p'' from the Legendre ODE
    guess = -np.cos(np.pi * np.arange(1, p) / p)

    def f_and_df(x):
        vals, der = legendre_all_deriv(p, x)
        d1 = der[p]
        d2 = (2 * x * d1 - p * (p + 1) * vals[p]) / (1 - x * x)
        return d1, d2

    interior = _newton(f_and_df, guess)
    # enforce exact symmetry
    interior = 0.5 * (interior - interior[::-1])
    nodes = np.concatenate(([-1.0], interior, [1.0]))
    lp = legendre_all(p, nodes)[p]
    weights = 2.0 / (p * (p + 1) * lp**2)
    return nodes, weights


def gauss_lobatto_points(p: int) -> np.ndarray:
    """The p+1 zeros of (1 - t^2) L_p'(t), increasing, symmetric."""
    return _gauss_lobatto(p)[0].copy()


def gauss_lobatto_rule(p: int) -> QuadRule:
    nodes, weights = _gauss_lobatto(p)
    return QuadRule(nodes.copy(), weights.copy(), 2 * p - 1)


@lru_cache(maxsize=None)
def _gauss_legendre(n: int):
    if n < 1:
        raise ValueError("Gauss-Legendre rule needs n >= 1")
    if n == 1:
        return np.array([0.0]), np.array([2.0])
    k = np.arange(1, n + 1)
    guess = -np.cos(np.pi * (k - 0.25) / (n + 0.5))

    def f_and_df(x):
        vals, der = legendre_all_deriv(n, x)
        return vals[n], der[n]

    nodes = _newton(f_and_df, guess)
    nodes = 0.5 * (nodes - nodes[::-1])
    der = legendre_all_deriv(n, nodes)[1][n]
    weights = 2.0 / ((1 - nodes**2) * der**2)
    return nodes, weights


def gauss_legendre_rule(n: int) -> QuadRule:
    nodes, weights = _gauss_legendre(n)
    return QuadRule(nodes.copy(), weights.copy(), 2 * n - 1)


@dataclass(frozen=True)
class LagrangeBasis1D:
    """Nodal Lagrange basis on given points of [-1, 1].

    Evaluation goes through the Legendre-Vandermonde matrix, so the basis
    is stable for Gauss-Lobatto points up to moderate degree.
    """

    points: np.ndarray
    _coeffs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        vander = legendre_all(len(pts) - 1, pts).T
        object.__setattr__(self, "_coeffs", np.linalg.inv(vander))

    @property
    def degree(self) -> int:
        return len(self.points) - 1

    def values(self, t) -> np.ndarray:
        """Table of shape ``(len(t), p + 1)``: basis_k(t_m)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return legendre_all(self.degree, t).T @ self._coeffs

    def derivatives(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return legendre_all_deriv(self.degree, t)[1].T @ self._coeffs


@lru_cache(maxsize=None)
def gl_lagrange_basis(p: int) -> LagrangeBasis1D:
    """Lagrange basis of degree ``p`` on the Gauss-Lobatto points."""
    return LagrangeBasis1D(gauss_lobatto_points(p))
