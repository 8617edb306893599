"""Entropy functionals along a flow and a conjugate heat solution.

Every functional comes with the integrand of its time derivative so that a
run can compare the derivative formula with finite differences of the
functional itself.  The potentials phi, phi_+ are always derived from u,
never evolved on their own.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from . import geometry as geo
from .errors import ConstraintError, DomainError, PositivityError
from .flows import (FlowState, FlowTrajectory, alpha, b_minus_delta_a_closed,
                    theta_general, trace_a)
from .heat import HeatSolution

#: manifold dimension of the grid backend
DIM = 2


def _positive(u):
    u = np.asarray(u, dtype=float)
    if u.min() <= 0:
        raise PositivityError("u must be strictly positive")
    return u


def _bmda(s: FlowState, bmda):
    return b_minus_delta_a_closed(s) if bmda is None else bmda


def entropy_E(s: FlowState, u) -> float:
    """Boltzmann-Shannon entropy int u log u dy."""
    u = _positive(u)
    return geo.integrate(s.metric, u * np.log(u))


def entropy_E1(s: FlowState, u) -> float:
    """First derivative of E: int (|grad log u|^2 + A) u dy."""
    u = _positive(u)
    g = s.metric
    return geo.integrate(g, (geo.grad_norm_sq(g, np.log(u)) + trace_a(s)) * u)


def entropy_E2(s: FlowState, u, bmda=None) -> float:
    """Second derivative of E: 2 int (|alpha - Hess log u|^2 + Theta(grad log u)) u dy.

    ``bmda`` is B - Delta A; the closed form of the flow is used when omitted.
    """
    u = _positive(u)
    g = s.metric
    lu = np.log(u)
    dev = alpha(s) - geo.hessian(g, lu)
    theta = theta_general(s, geo.gradient(g, lu), _bmda(s, bmda))
    return geo.integrate(g, 2 * (geo.tensor_norm_sq(g, dev) + theta) * u)


def _check_phi(s: FlowState, phi, tol=1e-6):
    phi = np.asarray(phi, dtype=float)
    mass = geo.integrate(s.metric, np.exp(-phi))
    if abs(mass - 1) > tol:
        raise ConstraintError(f"int exp(-phi) dy = {mass:.9g}, expected 1")
    return phi


def f_functional(s: FlowState, phi, k: float) -> float:
    """F_k(g, phi) = int (|grad phi|^2 + k A) e^-phi dy."""
    phi = _check_phi(s, phi)
    g = s.metric
    return geo.integrate(g, (geo.grad_norm_sq(g, phi) + k * trace_a(s)) * np.exp(-phi))


def f_derivative_formula(s: FlowState, phi, k: float, bmda=None) -> float:
    phi = _check_phi(s, phi)
    g = s.metric
    bmda = _bmda(s, bmda)
    al = alpha(s)
    theta = theta_general(s, -geo.gradient(g, phi), bmda)
    integrand = (2 * (geo.tensor_norm_sq(g, al + geo.hessian(g, phi))
                      + (k - 1) * geo.tensor_norm_sq(g, al))
                 + 2 * (theta + 0.5 * (k - 1) * bmda))
    return geo.integrate(g, integrand * np.exp(-phi))


def au_integral_identity(traj: FlowTrajectory, u_states, index: int, bmda=None):
    """(lhs, rhs) of d/dt int A u dy = int 2(|alpha|^2 + (B - Delta A)/2) u dy.

    ``index`` counts full steps; lhs is a central difference over two steps.
    """
    if not 1 <= index <= traj.n_full - 2:
        raise IndexError(f"full-step index {index} needs both neighbours")

    def au(j):
        s = traj.full_state(j)
        return geo.integrate(s.metric, trace_a(s) * u_states[j])

    lhs = (au(index + 1) - au(index - 1)) / (2 * traj.dt)
    s = traj.full_state(index)
    g = s.metric
    integrand = 2 * (geo.tensor_norm_sq(g, alpha(s)) + 0.5 * _bmda(s, bmda))
    return lhs, geo.integrate(g, integrand * u_states[index])


def _tau(s, T_ref):
    tau = T_ref - s.time
    if tau <= 0:
        raise DomainError(f"tau = T_ref - t = {tau:.6g} must be positive")
    return tau


def _sigma(s, T_ref):
    sigma = s.time - T_ref
    if sigma <= 0:
        raise DomainError(f"sigma = t - T_ref = {sigma:.6g} must be positive")
    return sigma


def w_entropy(s: FlowState, u, T_ref: float) -> float:
    """Shrinker entropy W with phi = -log((4 pi tau)^(n/2) u), tau = T_ref - t."""
    tau = _tau(s, T_ref)
    u = _positive(u)
    g = s.metric
    phi = -np.log((4 * np.pi * tau) ** (DIM / 2) * u)
    integrand = tau * (geo.grad_norm_sq(g, phi) + trace_a(s)) + phi - DIM
    # (4 pi tau)^(-n/2) e^-phi is u itself
    return geo.integrate(g, integrand * u)


def w_derivative_formula(s: FlowState, u, T_ref: float, bmda=None) -> float:
    tau = _tau(s, T_ref)
    u = _positive(u)
    g = s.metric
    phi = -np.log((4 * np.pi * tau) ** (DIM / 2) * u)
    dev = alpha(s) + geo.hessian(g, phi) - g.as_tensor() * (1 / (2 * tau))
    theta = theta_general(s, -geo.gradient(g, phi), _bmda(s, bmda))
    return geo.integrate(g, 2 * tau * (geo.tensor_norm_sq(g, dev) + theta) * u)


def w_plus_entropy(s: FlowState, u, T_ref: float) -> float:
    """Expander entropy W_+ with phi_+ = -log((4 pi sigma)^(n/2) u), sigma = t - T_ref."""
    sigma = _sigma(s, T_ref)
    u = _positive(u)
    g = s.metric
    phi = -np.log((4 * np.pi * sigma) ** (DIM / 2) * u)
    integrand = sigma * (geo.grad_norm_sq(g, phi) + trace_a(s)) - phi + DIM
    return geo.integrate(g, integrand * u)


def w_plus_derivative_formula(s: FlowState, u, T_ref: float, bmda=None) -> float:
    sigma = _sigma(s, T_ref)
    u = _positive(u)
    g = s.metric
    phi = -np.log((4 * np.pi * sigma) ** (DIM / 2) * u)
    dev = alpha(s) + geo.hessian(g, phi) + g.as_tensor() * (1 / (2 * sigma))
    theta = theta_general(s, -geo.gradient(g, phi), _bmda(s, bmda))
    return geo.integrate(g, 2 * sigma * (geo.tensor_norm_sq(g, dev) + theta) * u)


# -- series ----------------------------------------------------------------

@dataclass
class SeriesConfig:
    k_values: Sequence[float] = (1.0,)
    #: W reference time; None means t_end + dt
    w_tref: Optional[float] = None
    #: W_+ reference time; None disables W_+
    wplus_tref: Optional[float] = None
    #: absolute slack for monotonicity verdicts
    slack: float = 1e-6


def _central(y, dt):
    d = np.full_like(y, np.nan)
    d[1:-1] = (y[2:] - y[:-2]) / (2 * dt)
    return d


def _second(y, dt):
    d = np.full_like(y, np.nan)
    d[1:-1] = (y[2:] - 2 * y[1:-1] + y[:-2]) / dt**2
    return d


@dataclass
class EntropySeries:
    """Functionals and derivative formulas on the full-step times of a run.

    ``F``, ``dF_formula`` map each k to an array.  W entries are NaN where
    tau <= 0, W_+ entries where sigma <= 0.
    """

    times: np.ndarray
    dt: float
    E: np.ndarray
    E1_formula: np.ndarray
    E2_formula: np.ndarray
    F: Dict[float, np.ndarray]
    dF_formula: Dict[float, np.ndarray]
    W: np.ndarray
    dW_formula: np.ndarray
    W_plus: np.ndarray
    dWplus_formula: np.ndarray
    min_theta: np.ndarray
    min_bmda: np.ndarray
    verdicts: Dict[str, float] = field(default_factory=dict)

    @property
    def E1_fd(self):
        return _central(self.E, self.dt)

    @property
    def E2_fd(self):
        return _second(self.E, self.dt)

    def dF_fd(self, k):
        return _central(self.F[k], self.dt)

    @property
    def dW_fd(self):
        return _central(self.W, self.dt)

    @property
    def dWplus_fd(self):
        return _central(self.W_plus, self.dt)


def relative_residual(formula, fd, floor=1e-6):
    """max |formula - fd| / max(|fd|, floor) over entries where both are finite."""
    formula, fd = np.asarray(formula), np.asarray(fd)
    ok = np.isfinite(formula) & np.isfinite(fd)
    if not ok.any():
        return np.nan
    return float(np.max(np.abs(formula[ok] - fd[ok]) / np.maximum(np.abs(fd[ok]), floor)))


def min_forward_difference(y):
    y = np.asarray(y)
    y = y[np.isfinite(y)]
    return float(np.min(np.diff(y))) if len(y) > 1 else np.nan


def build_series(traj: FlowTrajectory, heat: HeatSolution,
                 config: Optional[SeriesConfig] = None) -> EntropySeries:
    """Evaluate every configured functional at every full step."""
    config = config or SeriesConfig()
    m = traj.n_full
    times = traj.full_times
    t_end = float(times[-1])
    w_tref = t_end + traj.dt if config.w_tref is None else config.w_tref
    nan = lambda: np.full(m, np.nan)  # noqa: E731
    E, E1, E2 = nan(), nan(), nan()
    F = {k: nan() for k in config.k_values}
    dF = {k: nan() for k in config.k_values}
    W, dW, Wp, dWp = nan(), nan(), nan(), nan()
    min_theta, min_bmda = nan(), nan()

    for j in range(m):
        s = traj.full_state(j)
        u = heat.u_states[j]
        g = s.metric
        bmda = b_minus_delta_a_closed(s)
        E[j] = entropy_E(s, u)
        E1[j] = entropy_E1(s, u)
        E2[j] = entropy_E2(s, u, bmda)
        phi = -np.log(u / heat.mass)
        for k in config.k_values:
            F[k][j] = f_functional(s, phi, k)
            dF[k][j] = f_derivative_formula(s, phi, k, bmda)
        if w_tref - s.time > 0:
            W[j] = w_entropy(s, u, w_tref)
            dW[j] = w_derivative_formula(s, u, w_tref, bmda)
        if config.wplus_tref is not None and s.time - config.wplus_tref > 0:
            Wp[j] = w_plus_entropy(s, u, config.wplus_tref)
            dWp[j] = w_plus_derivative_formula(s, u, config.wplus_tref, bmda)
        min_theta[j] = theta_general(s, geo.gradient(g, np.log(u)), bmda).min()
        min_bmda[j] = bmda.min()

    series = EntropySeries(times, traj.dt, E, E1, E2, F, dF, W, dW, Wp, dWp,
                           min_theta, min_bmda)
    v = series.verdicts
    v["E1_residual"] = relative_residual(E1, series.E1_fd)
    v["E2_residual"] = relative_residual(E2, series.E2_fd)
    v["E_min_second_difference"] = float(np.nanmin(np.diff(E, 2))) if m > 2 else np.nan
    for k in config.k_values:
        v[f"dF_{k:g}_residual"] = relative_residual(dF[k], series.dF_fd(k))
        v[f"F_{k:g}_min_forward_difference"] = min_forward_difference(F[k])
    v["dW_residual"] = relative_residual(dW, series.dW_fd)
    v["W_min_forward_difference"] = min_forward_difference(W)
    if config.wplus_tref is not None:
        v["dWplus_residual"] = relative_residual(dWp, series.dWplus_fd)
        v["Wplus_min_forward_difference"] = min_forward_difference(Wp)
    v["slack"] = config.slack
    return series
