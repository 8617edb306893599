"""Discrete Riemannian geometry on the flat-topology torus.

Metrics are restricted to the diagonal, x-only class

    g = a(x) dx^2 + b(x) dy^2    on  [0, L_x) x [0, L_y),

and all scalar fields depend on x only.  Scalar fields are plain 1-D numpy
arrays sampled at ``grid.x``; tensors and vector fields are thin containers
around pairs of such arrays.  Derivatives are second-order central
differences on the uniform periodic grid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidMetricError

#: metrics with a coefficient below this are rejected, never regularized
MIN_METRIC = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid in x plus the period of the trivial y direction."""

    n_points: int
    len_x: float = 2 * np.pi
    len_y: float = 2 * np.pi

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 16 or self.n_points % 2:
            raise ValueError(f"n_points must be an even integer >= 16, got {self.n_points}")
        if not (self.len_x > 0 and self.len_y > 0):
            raise ValueError("periods must be positive")

    @property
    def h(self) -> float:
        return self.len_x / self.n_points

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n_points) * self.h

    def sample(self, func) -> np.ndarray:
        """Evaluate ``func(x)`` on the grid nodes."""
        return np.asarray(func(self.x), dtype=float) * np.ones(self.n_points)

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.n_points * factor, self.len_x, self.len_y)


def check_field(grid: GridSpec, f, name="field") -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n_points,):
        raise ValueError(f"{name} has shape {f.shape}, expected ({grid.n_points},)")
    if not np.all(np.isfinite(f)):
        raise ValueError(f"{name} contains non-finite values")
    return f


@dataclass(frozen=True)
class VectorField:
    """Contravariant vector field V = x d/dx + y d/dy (x-only components)."""

    x: np.ndarray
    y: np.ndarray

    def __mul__(self, s):
        return VectorField(self.x * s, self.y * s)

    __rmul__ = __mul__

    def __neg__(self):
        return VectorField(-self.x, -self.y)


@dataclass(frozen=True)
class SymTensor2Field:
    """Diagonal symmetric 2-tensor p dx^2 + q dy^2.

    Off-diagonal components vanish identically for every tensor that occurs
    in the x-only class, so they are not stored.
    """

    xx: np.ndarray
    yy: np.ndarray

    def __add__(self, other):
        return SymTensor2Field(self.xx + other.xx, self.yy + other.yy)

    def __sub__(self, other):
        return SymTensor2Field(self.xx - other.xx, self.yy - other.yy)

    def __mul__(self, s):
        return SymTensor2Field(self.xx * s, self.yy * s)

    __rmul__ = __mul__

    def __neg__(self):
        return SymTensor2Field(-self.xx, -self.yy)

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), np.zeros(n))


@dataclass(frozen=True)
class DiagonalMetric:
    """g = a(x) dx^2 + b(x) dy^2 with strictly positive a and b."""

    grid: GridSpec
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        for name in ("a", "b"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (self.grid.n_points,):
                raise InvalidMetricError(f"metric component {name} has shape {v.shape}")
            if not np.all(np.isfinite(v)):
                raise InvalidMetricError(f"metric component {name} is not finite")
            if v.min() < MIN_METRIC:
                raise InvalidMetricError(
                    f"metric component {name} has minimum {v.min():.3e} below {MIN_METRIC}")
            object.__setattr__(self, name, v)

    @classmethod
    def flat(cls, grid: GridSpec, scale: float = 1.0):
        return cls(grid, np.full(grid.n_points, scale), np.full(grid.n_points, scale))

    @classmethod
    def conformal(cls, grid: GridSpec, u):
        """a = b = exp(2u)."""
        e = np.exp(2 * check_field(grid, u, "u"))
        return cls(grid, e, e.copy())

    def scaled(self, eps: float) -> "DiagonalMetric":
        return DiagonalMetric(self.grid, eps * self.a, eps * self.b)

    @property
    def density(self) -> np.ndarray:
        """Volume density sqrt(a b)."""
        return np.sqrt(self.a * self.b)

    def as_tensor(self) -> SymTensor2Field:
        return SymTensor2Field(self.a.copy(), self.b.copy())


# -- periodic finite differences ------------------------------------------

def ddx(f, h):
    return (np.roll(f, -1) - np.roll(f, 1)) / (2 * h)


def d2dx2(f, h):
    return (np.roll(f, -1) - 2 * f + np.roll(f, 1)) / h**2


# -- curvature and differential operators ---------------------------------

def gauss_curvature(g: DiagonalMetric) -> np.ndarray:
    """K = -(1/(2 sqrt(ab))) d/dx( b' / sqrt(ab) ).

    The Ricci tensor is K g and the scalar curvature 2K.  Because the outer
    derivative is a central difference, the discrete total curvature
    ``integrate(g, K)`` vanishes to rounding on every metric.
    """
    h = g.grid.h
    w = g.density
    return -ddx(ddx(g.b, h) / w, h) / (2 * w)


def scalar_curvature(g):
    return 2 * gauss_curvature(g)


def ricci(g: DiagonalMetric) -> SymTensor2Field:
    k = gauss_curvature(g)
    return SymTensor2Field(k * g.a, k * g.b)


def laplace_beltrami(g: DiagonalMetric, f) -> np.ndarray:
    """Delta f = (1/sqrt(ab)) d/dx( sqrt(b/a) f' ) in flux form.

    Fluxes live on the half nodes with the arithmetic mean of sqrt(b/a),
    so ``integrate(g, laplace_beltrami(g, f))`` is zero to rounding.
    """
    h = g.grid.h
    s = np.sqrt(g.b / g.a)
    s_half = 0.5 * (s + np.roll(s, -1))
    flux = s_half * (np.roll(f, -1) - f) / h
    return (flux - np.roll(flux, 1)) / (h * g.density)


def gradient(g: DiagonalMetric, f) -> VectorField:
    """Metric gradient (index raised): (f'/a, 0)."""
    return VectorField(ddx(f, g.grid.h) / g.a, np.zeros_like(f))


def grad_norm_sq(g: DiagonalMetric, f) -> np.ndarray:
    return ddx(f, g.grid.h) ** 2 / g.a


def inner_grad(g: DiagonalMetric, f1, f2) -> np.ndarray:
    h = g.grid.h
    return ddx(f1, h) * ddx(f2, h) / g.a


def vector_norm_sq(g: DiagonalMetric, v: VectorField) -> np.ndarray:
    return g.a * v.x**2 + g.b * v.y**2


def hessian(g: DiagonalMetric, f) -> SymTensor2Field:
    """Covariant Hessian of an x-only function.

    With Gamma^x_xx = a'/2a and Gamma^x_yy = -b'/2a the components are
    f'' - (a'/2a) f' and (b'/2a) f'.
    """
    h = g.grid.h
    fp = ddx(f, h)
    return SymTensor2Field(d2dx2(f, h) - ddx(g.a, h) / (2 * g.a) * fp,
                           ddx(g.b, h) / (2 * g.a) * fp)


def divergence(g: DiagonalMetric, t: SymTensor2Field) -> np.ndarray:
    """x-component of the 1-form Div(T)_k = g^ij nabla_i T_jk.

    The y-component vanishes identically in the x-only class, so only the
    x-component is returned.
    """
    h = g.grid.h
    ap, bp = ddx(g.a, h), ddx(g.b, h)
    p, q = t.xx, t.yy
    return (ddx(p, h) - ap / g.a * p) / g.a + (bp * p / (2 * g.a) - bp * q / (2 * g.b)) / g.b


def divergence_field(g: DiagonalMetric, t: SymTensor2Field) -> VectorField:
    """Divergence as a (covariant) component pair, y-part identically zero."""
    dx = divergence(g, t)
    return VectorField(dx, np.zeros_like(dx))


def tensor_norm_sq(g: DiagonalMetric, t: SymTensor2Field) -> np.ndarray:
    return t.xx**2 / g.a**2 + t.yy**2 / g.b**2


def tensor_apply(g: DiagonalMetric, t: SymTensor2Field, v: VectorField) -> np.ndarray:
    """T(V, V)."""
    return t.xx * v.x**2 + t.yy * v.y**2


def metric_tensor_trace(g: DiagonalMetric, t: SymTensor2Field) -> np.ndarray:
    return t.xx / g.a + t.yy / g.b


def integrate(g: DiagonalMetric, f) -> float:
    """Rectangle rule for int f dy; spectrally accurate for smooth periodic f."""
    return float(g.grid.len_y * g.grid.h * np.sum(f * g.density))


def volume(g: DiagonalMetric) -> float:
    return integrate(g, np.ones(g.grid.n_points))
