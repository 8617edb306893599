"""Lowest eigenvalue of -Delta + cA, its time derivative, and the
scale-invariant eigenvalue lambda * V^(2/n).

The reduced x-operator is assembled in flux form against the discrete
measure sqrt(ab) h L_y, which makes it exactly self-adjoint.  With
y = sqrt(w) f it becomes a symmetric cyclic tridiagonal matrix, solved by
shifted inverse iteration.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from . import geometry as geo
from .errors import ConfigurationError, ConvergenceError, PositivityError
from .flows import FlowState, alpha, b_minus_delta_a_closed, theta_general, trace_a
from .geometry import DiagonalMetric, SymTensor2Field
from .tridiag import CyclicTridiagonal

DIM = 2


@dataclass(frozen=True)
class EigenResult:
    lam: float
    eigenfunction: np.ndarray
    iterations: int
    residual: float
    c: float = np.nan


def _half_weights(g: DiagonalMetric):
    s = np.sqrt(g.b / g.a)
    return 0.5 * (s + np.roll(s, -1))


def symmetric_operator(g: DiagonalMetric, A, c) -> CyclicTridiagonal:
    """sqrt(W)^-1 (K + c diag(A w)) sqrt(W)^-1 in the variables y = sqrt(w) f."""
    h = g.grid.h
    w = g.density
    s_half = _half_weights(g)
    diag = (s_half + np.roll(s_half, 1)) / h**2 / w + c * np.asarray(A)
    rw = np.sqrt(w)
    upper = -s_half / h**2 / (rw * np.roll(rw, -1))
    lower = np.roll(upper, 1)
    return CyclicTridiagonal(lower, diag, upper)


def dirichlet_form(g: DiagonalMetric, f) -> float:
    """int |grad f|^2 dy in the discrete form matching the operator."""
    h = g.grid.h
    df = (np.roll(f, -1) - f) / h
    return float(g.grid.len_y * h * np.sum(_half_weights(g) * df**2))


def rayleigh_quotient(g: DiagonalMetric, A, c, f) -> float:
    """(int |grad f|^2 + c A f^2 dy) / int f^2 dy."""
    return (dirichlet_form(g, f) + c * geo.integrate(g, A * f**2)) / geo.integrate(g, f**2)


def operator_apply(g: DiagonalMetric, A, c, f):
    """-Delta f + c A f."""
    return -geo.laplace_beltrami(g, f) + c * np.asarray(A) * f


def weighted_norm(g, f):
    return np.sqrt(geo.integrate(g, f**2))


def _normalize(g, f):
    f = f if f.sum() >= 0 else -f
    return f / weighted_norm(g, f)


def lowest_eigenpair(g: DiagonalMetric, A, c: float, *, tol: float = 1e-11,
                     max_iter: int = 5000, seed: int = 0,
                     start: Optional[np.ndarray] = None) -> EigenResult:
    """Lowest eigenpair of -Delta + cA by inverse iteration with shift min(cA) - 1.

    The eigenfunction is returned positive and normalized to int f^2 dy = 1.
    Iteration stops when the weighted residual ||Lf - lam f|| drops below
    ``tol * max(1, |lam|)``.
    """
    A = geo.check_field(g.grid, A, "A")
    op = symmetric_operator(g, A, c)
    shift = float(np.min(c * A)) - 1.0
    shifted = CyclicTridiagonal(op.lower, op.diag - shift, op.upper)
    rw = np.sqrt(g.density)
    if start is None:
        y = np.random.default_rng(seed).uniform(0.5, 1.5, g.grid.n_points)
    else:
        y = rw * np.asarray(start, dtype=float)
    y /= np.linalg.norm(y)

    lam, residual = np.nan, np.inf
    for it in range(1, max_iter + 1):
        y = shifted.solve(y)
        y /= np.linalg.norm(y)
        my = op.matvec(y)
        lam = float(y @ my)
        # with ||y|| = 1, ||My - lam y|| equals the weighted residual of f
        residual = float(np.linalg.norm(my - lam * y))
        if residual <= tol * max(1.0, abs(lam)):
            break
    else:
        raise ConvergenceError(f"inverse iteration did not converge in {max_iter} steps", residual)

    f = _normalize(g, y / rw)
    if f.min() <= 0:
        raise PositivityError("ground state changed sign; eigenvalue is not simple at this resolution")
    lam = rayleigh_quotient(g, A, c, f)
    res = weighted_norm(g, operator_apply(g, A, c, f) - lam * f)
    return EigenResult(lam, f, it, float(res), c)


def lowest_eigenvalue_2d_check(g: DiagonalMetric, A, c: float, n_y: int, *,
                               tol: float = 1e-12, max_iter: int = 500, seed: int = 0) -> float:
    """Lowest eigenvalue of the full N x n_y operator, x-only coefficients.

    Used only to confirm that the ground state does not depend on y.  Inverse
    iteration with a conjugate-gradient inner solve.
    """
    n = g.grid.n_points
    if n * n_y > 4096:
        raise ConfigurationError(f"2D check limited to 4096 unknowns, got {n * n_y}")
    hx = g.grid.h
    hy = g.grid.len_y / n_y
    A = geo.check_field(g.grid, A, "A")
    w = g.density
    s_half = _half_weights(g)

    def ring(m, weights_fwd):
        off = sp.diags(weights_fwd[:-1], 1, shape=(m, m)).tolil()
        off[m - 1, 0] = weights_fwd[-1]
        off = off.tocsr()
        d = weights_fwd + np.roll(weights_fwd, 1)
        return sp.diags(d) - off - off.T

    kx = ring(n, s_half) / hx**2
    ky = ring(n_y, np.ones(n_y)) / hy**2
    iy = sp.identity(n_y)
    stiff = sp.kron(kx, iy) + sp.kron(sp.diags(np.sqrt(g.a / g.b)), ky) + sp.kron(sp.diags(c * A * w), iy)
    rw = np.repeat(np.sqrt(w), n_y)
    m2 = sp.diags(1 / rw) @ stiff @ sp.diags(1 / rw)
    shift = float(np.min(c * A)) - 1.0
    shifted = (m2 - shift * sp.identity(n * n_y)).tocsr()

    y = np.random.default_rng(seed).uniform(0.5, 1.5, n * n_y)
    y /= np.linalg.norm(y)
    lam_old = np.inf
    for _ in range(max_iter):
        y, info = cg(shifted, y, rtol=1e-14, atol=0.0, maxiter=10 * n * n_y)
        y /= np.linalg.norm(y)
        lam = float(y @ (m2 @ y))
        if abs(lam - lam_old) <= tol * max(1.0, abs(lam)):
            return lam
        lam_old = lam
    raise ConvergenceError("2D inverse iteration did not converge", abs(lam - lam_old))


# -- eigenvalue derivative -------------------------------------------------

def _log_f(eig: EigenResult):
    f = eig.eigenfunction
    if f.min() <= 0:
        raise PositivityError("eigenfunction must be positive")
    return np.log(f)


def lambda_prime_integrand(s: FlowState, eig: EigenResult, c: float, bmda=None):
    """Pointwise density whose integral is lambda'(t).

    (1/2)(|alpha - 2 Hess log f|^2 + (4c-1)|alpha|^2 + Theta(2 grad log f)
    + ((4c-1)/2)(B - Delta A)) f^2.  Consumes no heat-equation data.
    """
    g = s.metric
    lf = _log_f(eig)
    bmda = b_minus_delta_a_closed(s) if bmda is None else bmda
    al = alpha(s)
    dev = al - 2 * geo.hessian(g, lf)
    theta = theta_general(s, 2 * geo.gradient(g, lf), bmda)
    k = 4 * c - 1
    return 0.5 * (geo.tensor_norm_sq(g, dev) + k * geo.tensor_norm_sq(g, al)
                  + theta + 0.5 * k * bmda) * eig.eigenfunction**2


def lambda_prime_formula(s: FlowState, eig: EigenResult, c: float, bmda=None) -> float:
    return geo.integrate(s.metric, lambda_prime_integrand(s, eig, c, bmda))


def lambda_prime_flow_specialized_integrand(s: FlowState, eig: EigenResult, c: float):
    """Flow-specific form of the lambda' density for Ricci and List flows.

    For List's flow the cross term is (Delta v + 2<grad v, grad log f>)^2,
    which is what Theta(2 grad log f) reduces to.
    """
    g = s.metric
    lf = _log_f(eig)
    f2 = eig.eigenfunction**2
    rc = geo.ricci(g)
    if s.kind.tag == "ricci":
        return 0.5 * (geo.tensor_norm_sq(g, rc - 2 * geo.hessian(g, lf))
                      + (4 * c - 1) * geo.tensor_norm_sq(g, rc)) * f2
    if s.kind.tag == "list":
        a_n = s.kind.a_n
        v = s.aux
        dv = geo.ddx(v, g.grid.h)
        al = rc - SymTensor2Field(a_n * dv**2, np.zeros_like(dv))
        lap_v = geo.laplace_beltrami(g, v)
        cross = lap_v + 2 * geo.inner_grad(g, v, lf)
        return (0.5 * geo.tensor_norm_sq(g, al - 2 * geo.hessian(g, lf))
                + (2 * c - 0.5) * geo.tensor_norm_sq(g, al)
                + 0.5 * a_n * (cross**2 + (4 * c - 1) * lap_v**2)) * f2
    raise ConfigurationError(f"no specialized lambda' formula for flow kind {s.kind.tag!r}")


def lambda_prime_flow_specialized(s: FlowState, eig: EigenResult, c: float) -> float:
    return geo.integrate(s.metric, lambda_prime_flow_specialized_integrand(s, eig, c))


def lemma_identity_residual(g: DiagonalMetric, f, lam: float):
    """(lhs, rhs) of int psi Delta f^2 = 2 int (|Hess log f|^2 + Rc(grad log f, grad log f)) f^2.

    psi is rebuilt as lam + Delta f / f so that lam f = -Delta f + psi f.
    """
    f = np.asarray(f, dtype=float)
    if f.min() <= 0:
        raise PositivityError("f must be strictly positive")
    psi = lam + geo.laplace_beltrami(g, f) / f
    lhs = geo.integrate(g, psi * geo.laplace_beltrami(g, f**2))
    lf = np.log(f)
    grad = geo.gradient(g, lf)
    integrand = geo.tensor_norm_sq(g, geo.hessian(g, lf)) + geo.tensor_apply(g, geo.ricci(g), grad)
    return lhs, geo.integrate(g, 2 * integrand * f**2)


# -- normalized eigenvalue -------------------------------------------------

def normalized_lambda(g: DiagonalMetric, lam: float, dim: int = DIM) -> float:
    """lambda * V^(2/n); invariant under constant rescaling of the metric."""
    if dim != DIM:
        raise ConfigurationError("the grid backend is two-dimensional")
    return lam * geo.volume(g) ** (2 / dim)


def holder_terms(s: FlowState, eig: EigenResult):
    """(int (A - 2 Delta log f) f^2, int (A - 2 Delta log f)^2 f^2)."""
    g = s.metric
    q = trace_a(s) - 2 * geo.laplace_beltrami(g, _log_f(eig))
    f2 = eig.eigenfunction**2
    return geo.integrate(g, q * f2), geo.integrate(g, q**2 * f2)


def lambda_bar_lower_bound(s: FlowState, eig: EigenResult, bmda=None):
    """(lb, holder_gap, tensor_term) bounding d/dt(lambda V) from below when lambda <= 0.

    tensor_term = int (|alpha - 2 Hess log f - (1/n)(A - 2 Delta log f) g|^2
    + Theta(2 grad log f)) f^2; holder_gap is the Cauchy-Schwarz defect of
    A - 2 Delta log f against f^2.  Both are nonnegative up to O(h^2).
    """
    if not np.isclose(eig.c, 0.25, rtol=0, atol=1e-15):
        raise ConfigurationError(f"lower bound is stated for c = 1/4, eigenpair has c = {eig.c}")
    g = s.metric
    lf = _log_f(eig)
    bmda = b_minus_delta_a_closed(s) if bmda is None else bmda
    q = trace_a(s) - 2 * geo.laplace_beltrami(g, lf)
    traceless = alpha(s) - 2 * geo.hessian(g, lf) - g.as_tensor() * (q / DIM)
    theta = theta_general(s, 2 * geo.gradient(g, lf), bmda)
    f2 = eig.eigenfunction**2
    tensor_term = geo.integrate(g, (geo.tensor_norm_sq(g, traceless) + theta) * f2)
    first, second = holder_terms(s, eig)
    holder_gap = second - first**2
    scale = geo.volume(g) ** (2 / DIM)
    lb = scale / 2 * tensor_term + scale / (2 * DIM) * holder_gap
    return lb, holder_gap, tensor_term
