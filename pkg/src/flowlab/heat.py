"""Backward solve of the conjugate heat equation du/dt = -Delta u + A u."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from . import geometry as geo
from .errors import ConservationError, PositivityError, StabilityError
from .flows import FlowTrajectory, trace_a

#: relative mass drift that aborts a solve
MASS_DRIFT_LIMIT = 1e-6


@dataclass(frozen=True)
class HeatSolution:
    """Conjugate heat solution on the full-step times of ``traj``.

    ``u_states[j]`` lives at ``traj.full_times[j]``.
    """

    traj: FlowTrajectory
    u_states: List[np.ndarray]
    mass: float

    @property
    def times(self):
        return self.traj.full_times

    def masses(self) -> np.ndarray:
        return np.array([geo.integrate(self.traj.full_state(j).metric, u)
                         for j, u in enumerate(self.u_states)])


def _rhs(state, u):
    """Reversed-time right-hand side du/ds = Delta u - A u."""
    return geo.laplace_beltrami(state.metric, u) - trace_a(state) * u


def solve_backward(traj: FlowTrajectory, terminal, normalize: bool = True) -> HeatSolution:
    """Integrate from ``traj.times[-1]`` back to ``traj.times[0]``.

    In s = t_end - t the equation is forward parabolic, du/ds = Delta u - A u,
    and one RK4 step of size dt consumes the stored metric at the full step,
    the half step before it and the full step before that.
    """
    last = traj.state(len(traj) - 1)
    u = geo.check_field(traj.grid, terminal, "terminal").copy()
    if u.min() <= 0:
        raise PositivityError("terminal data must be strictly positive")
    mass = geo.integrate(last.metric, u)
    if normalize:
        u = u / mass
        mass = 1.0

    dt = traj.dt
    n_full = traj.n_full
    out = [None] * n_full
    out[-1] = u
    upper = last
    for j in range(n_full - 1, 0, -1):
        mid = traj.state(2 * j - 1)
        lower = traj.state(2 * j - 2)
        k1 = _rhs(upper, u)
        k2 = _rhs(mid, u + dt / 2 * k1)
        k3 = _rhs(mid, u + dt / 2 * k2)
        k4 = _rhs(lower, u + dt * k3)
        u = u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(u)) or u.min() <= 0:
            raise StabilityError(
                f"conjugate heat solution lost positivity at t = {lower.time:.6g}; use a smaller dt")
        m = geo.integrate(lower.metric, u)
        if abs(m - mass) > MASS_DRIFT_LIMIT * abs(mass):
            raise ConservationError(
                f"mass drifted from {mass:.12g} to {m:.12g} at t = {lower.time:.6g}")
        out[j - 1] = u
        upper = lower
    return HeatSolution(traj, out, mass)


def log_fields(heat: HeatSolution, index: int):
    """(log u, |grad log u|^2, Hess log u) at full step ``index``."""
    u = heat.u_states[index]
    if u.min() <= 0:
        raise PositivityError("log_fields needs u > 0")
    g = heat.traj.full_state(index).metric
    lu = np.log(u)
    return lu, geo.grad_norm_sq(g, lu), geo.hessian(g, lu)
