"""Manufactured convection-diffusion problems with exponential layers.

The exact solution is u(x, y) = xi(x) eta(y) with

    xi(x) = cos(pi x / 2) - (exp(-b1 x / eps) - exp(-b1 / eps)) / (1 - exp(-b1 / eps))

and eta of the same form in y with b2. Each 1D factor splits into a smooth
part ``cos(pi x/2) + A exp(-b/eps)`` and a layer part ``-A exp(-b x/eps)``
with ``A = 1 / (1 - exp(-b/eps))``; the four products are S, E12, E21, E22.
The layer part solves -eps e'' - b e' = 0 exactly, so the forcing is
assembled from the smooth parts only and never suffers cancellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

PARTS = ("S", "E12", "E21", "E22")


class Factor1D:
    """Scalar function of one variable with closed-form derivatives."""

    def deriv(self, k: int, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.deriv(0, x)


@dataclass(frozen=True)
class CosFactor(Factor1D):
    """cos(pi x / 2) + offset."""

    offset: float = 0.0

    def deriv(self, k, x):
        x = np.asarray(x, dtype=float)
        w = 0.5 * np.pi
        val = w**k * np.cos(w * x + 0.5 * k * np.pi)
        return val + self.offset if k == 0 else val


@dataclass(frozen=True)
class ExpFactor(Factor1D):
    """amp * exp(-rate * x); underflows quietly to 0."""

    amp: float
    rate: float

    def deriv(self, k, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(under="ignore"):
            return self.amp * (-self.rate) ** k * np.exp(-self.rate * x)


@dataclass(frozen=True)
class SumFactor(Factor1D):
    terms: tuple

    def deriv(self, k, x):
        return sum(t.deriv(k, x) for t in self.terms)


def layer_factors(eps: float, beta: float) -> tuple[CosFactor, ExpFactor]:
    """Smooth and layer parts of xi for layer strength ``beta``."""
    ratio = beta / eps
    amp = -1.0 / math.expm1(-ratio)
    tail = amp * math.exp(-ratio) if ratio < 745 else 0.0
    return CosFactor(tail), ExpFactor(-amp, ratio)


@dataclass(frozen=True)
class ProductField:
    """fx(x) * fy(y)."""

    fx: Factor1D
    fy: Factor1D

    def deriv(self, dx: int, dy: int, x, y):
        return self.fx.deriv(dx, x) * self.fy.deriv(dy, y)

    def __call__(self, x, y):
        return self.deriv(0, 0, x, y)

    def grad(self, x, y):
        return self.deriv(1, 0, x, y), self.deriv(0, 1, x, y)


@dataclass(frozen=True)
class SumField:
    terms: tuple

    def deriv(self, dx, dy, x, y):
        return sum(t.deriv(dx, dy, x, y) for t in self.terms)

    def __call__(self, x, y):
        return self.deriv(0, 0, x, y)

    def grad(self, x, y):
        return self.deriv(1, 0, x, y), self.deriv(0, 1, x, y)


@dataclass(frozen=True)
class DecomposedSolution:
    """u = S + E12 + E21 + E22 with mixed partials up to ``max_order``."""

    S: ProductField
    E12: ProductField
    E21: ProductField
    E22: ProductField
    max_order: int

    def part(self, name: str):
        if name == "u":
            return self.u
        if name not in PARTS:
            raise KeyError(f"unknown component {name!r}")
        return getattr(self, name)

    @property
    def u(self) -> SumField:
        return SumField((self.S, self.E12, self.E21, self.E22))

    def eval_part(self, name: str, dx: int, dy: int, x, y):
        if dx < 0 or dy < 0 or dx + dy > self.max_order:
            raise ValueError(
                f"derivative order {dx}+{dy} exceeds the available {self.max_order}")
        return self.part(name).deriv(dx, dy, x, y)

    def deriv(self, dx: int, dy: int, x, y):
        return self.eval_part("u", dx, dy, x, y)

    def __call__(self, x, y):
        return self.u(x, y)

    def grad(self, x, y):
        return self.u.grad(x, y)


@dataclass(frozen=True)
class LayerProblem:
    """-eps Lap u - b.grad u + c u = f on the unit square, u = 0 on the boundary."""

    eps: float
    b: Callable
    c: Callable
    gamma: float
    beta1: float
    beta2: float
    f: Callable
    exact: DecomposedSolution
    name: str = "layer2d"

    def div_b(self, x, y, h=1e-6):
        b1p = self.b(x + h, y)[0]
        b1m = self.b(x - h, y)[0]
        b2p = self.b(x, y + h)[1]
        b2m = self.b(x, y - h)[1]
        return (b1p - b1m + b2p - b2m) / (2 * h)

    def check_assumptions(self, n: int = 50) -> None:
        """Sample coercivity and layer-direction conditions on an n x n grid."""
        t = (np.arange(n) + 0.5) / n
        x, y = np.meshgrid(t, t, indexing="ij")
        b1, b2 = self.b(x, y)
        if np.any(self.c(x, y) + 0.5 * self.div_b(x, y) < self.gamma - 1e-12):
            raise ValueError("c + div(b)/2 >= gamma fails")
        if np.any(b1 < self.beta1) or np.any(b2 < self.beta2):
            raise ValueError("b_k >= beta_k fails")


def _shifted_operator(smooth: CosFactor, eps: float, beta: float) -> Callable:
    # -eps s'' - beta s' for the smooth factor; the layer factor drops out
    def op(x):
        return -eps * smooth.deriv(2, x) - beta * smooth.deriv(1, x)
    return op


def make_manufactured_problem(eps: float, p: int = 3) -> LayerProblem:
    """The built-in "layer2d" problem: b = (2, 3), c = 1."""
    beta1, beta2 = 2.0, 3.0
    sx, ex = layer_factors(eps, beta1)
    sy, ey = layer_factors(eps, beta2)
    exact = DecomposedSolution(
        S=ProductField(sx, sy),
        E12=ProductField(ex, sy),
        E21=ProductField(sx, ey),
        E22=ProductField(ex, ey),
        max_order=p + 2,
    )
    xi = SumFactor((sx, ex))
    eta = SumFactor((sy, ey))
    lx = _shifted_operator(sx, eps, beta1)
    ly = _shifted_operator(sy, eps, beta2)

    def f(x, y):
        xv, yv = xi(x), eta(y)
        return lx(x) * yv + xv * ly(y) + xv * yv

    def b(x, y):
        x = np.asarray(x, dtype=float)
        return np.full_like(x, beta1), np.full(np.shape(y), beta2)

    def c(x, y):
        return np.ones(np.broadcast(np.asarray(x), np.asarray(y)).shape)

    return LayerProblem(eps=eps, b=b, c=c, gamma=1.0, beta1=beta1, beta2=beta2,
                        f=f, exact=exact)


@dataclass(frozen=True)
class LayerProblem1D:
    """-eps u'' - b u' + c u = f on (0, 1), u(0) = u(1) = 0."""

    eps: float
    b: Callable
    c: Callable
    beta: float
    f: Callable
    smooth: Factor1D
    layer: Factor1D
    name: str = "layer1d"
    u: Factor1D = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "u", SumFactor((self.smooth, self.layer)))


def make_problem_1d(eps: float) -> LayerProblem1D:
    """The built-in "layer1d" problem: b = 2, c = 1, u = xi."""
    beta = 2.0
    s, e = layer_factors(eps, beta)
    op = _shifted_operator(s, eps, beta)
    xi = SumFactor((s, e))

    def f(x):
        return op(x) + xi(x)

    return LayerProblem1D(
        eps=eps,
        b=lambda x: np.full(np.shape(x), beta),
        c=lambda x: np.ones(np.shape(x)),
        beta=beta, f=f, smooth=s, layer=e)


PROBLEMS = {"layer2d": make_manufactured_problem, "layer1d": make_problem_1d}
