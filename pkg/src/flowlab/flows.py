"""Abstract geometric flows dg/dt = -2 alpha on the x-only torus class.

Four flow kinds are supported: a static metric, Ricci flow, List's extended
Ricci flow (metric coupled to a heat-flowing scalar v) and the Ricci flow
coupled to harmonic map flow with a scalar target and affine coupling
a(t) = a0 - decay_rate * t.  For each kind this module provides alpha, its
trace A, the error term Theta(V) and B - Delta A, both from the general
definitions and from the flow-specific closed forms.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import geometry as geo
from .errors import BlowUpError, ConfigurationError
from .geometry import DiagonalMetric, GridSpec, SymTensor2Field, VectorField

DEFAULT_CFL = 0.2

_TAGS = ("static", "ricci", "list", "rh")


@dataclass(frozen=True)
class FlowKind:
    """Which alpha drives the metric, plus the coupling parameters."""

    tag: str
    a_n: float = 0.0
    a0: float = 0.0
    decay_rate: float = 0.0

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ConfigurationError(f"unknown flow kind {self.tag!r}; expected one of {_TAGS}")
        if self.tag == "list" and not self.a_n > 0:
            raise ConfigurationError("ListExtended needs a_n > 0")
        if self.tag == "rh":
            if not self.a0 > 0:
                raise ConfigurationError("RicciHarmonic needs a0 > 0")
            if self.decay_rate < 0:
                raise ConfigurationError("RicciHarmonic decay_rate must be nonnegative")

    @classmethod
    def static(cls):
        return cls("static")

    @classmethod
    def ricci(cls):
        return cls("ricci")

    @classmethod
    def list_extended(cls, a_n):
        return cls("list", a_n=float(a_n))

    @classmethod
    def ricci_harmonic(cls, a0, decay_rate=0.0):
        return cls("rh", a0=float(a0), decay_rate=float(decay_rate))

    @property
    def aux_name(self) -> Optional[str]:
        return {"list": "v", "rh": "phi"}.get(self.tag)

    def coupling(self, t) -> float:
        """Coefficient in front of the d(aux) x d(aux) term of alpha."""
        if self.tag == "list":
            return self.a_n
        if self.tag == "rh":
            return self.a0 - self.decay_rate * t
        return 0.0

    def coupling_rate(self) -> float:
        return -self.decay_rate if self.tag == "rh" else 0.0

    def check_horizon(self, t_end):
        if self.tag == "rh" and not self.coupling(t_end) > 0:
            raise ConfigurationError(
                f"coupling a(t) = {self.a0} - {self.decay_rate} t is not positive at t = {t_end}")


@dataclass(frozen=True)
class FlowState:
    time: float
    metric: DiagonalMetric
    kind: FlowKind
    aux_v: Optional[np.ndarray] = None
    aux_phi: Optional[np.ndarray] = None

    def __post_init__(self):
        name = self.kind.aux_name
        have = {"v": self.aux_v is not None, "phi": self.aux_phi is not None}
        for key, present in have.items():
            if present != (key == name):
                what = "requires" if key == name else "does not take"
                raise ConfigurationError(f"flow kind {self.kind.tag!r} {what} aux field {key!r}")
        if name is not None:
            geo.check_field(self.grid, self.aux, name)

    @property
    def grid(self) -> GridSpec:
        return self.metric.grid

    @property
    def aux(self) -> Optional[np.ndarray]:
        return self.aux_v if self.kind.aux_name == "v" else self.aux_phi

    def with_(self, time, a, b, aux=None) -> "FlowState":
        metric = DiagonalMetric(self.grid, a, b)
        name = self.kind.aux_name
        return FlowState(time, metric, self.kind,
                         aux_v=aux if name == "v" else None,
                         aux_phi=aux if name == "phi" else None)


def make_state(kind: FlowKind, metric: DiagonalMetric, aux=None, time=0.0) -> FlowState:
    """Build a state, routing ``aux`` to the slot the flow kind expects."""
    name = kind.aux_name
    if name is None and aux is not None:
        raise ConfigurationError(f"flow kind {kind.tag!r} takes no aux field")
    return FlowState(time, metric, kind,
                     aux_v=aux if name == "v" else None,
                     aux_phi=aux if name == "phi" else None)


# -- alpha and its derived quantities -------------------------------------

def _coupled_rank_one(s: FlowState) -> SymTensor2Field:
    """coupling * d(aux) x d(aux), which lives entirely in the dx^2 slot."""
    dv = geo.ddx(s.aux, s.grid.h)
    return SymTensor2Field(s.kind.coupling(s.time) * dv**2, np.zeros_like(dv))


def alpha(s: FlowState) -> SymTensor2Field:
    if s.kind.tag == "static":
        return SymTensor2Field.zeros(s.grid.n_points)
    rc = geo.ricci(s.metric)
    if s.kind.tag == "ricci":
        return rc
    return rc - _coupled_rank_one(s)


def trace_a(s: FlowState) -> np.ndarray:
    """A = g^ij alpha_ij."""
    return geo.metric_tensor_trace(s.metric, alpha(s))


def grad_a_minus_2div_alpha(s: FlowState) -> VectorField:
    """The 1-form nabla A - 2 Div(alpha), assembled from geometry primitives."""
    g = s.metric
    al = alpha(s)
    dx = geo.ddx(geo.metric_tensor_trace(g, al), g.grid.h) - 2 * geo.divergence(g, al)
    return VectorField(dx, np.zeros_like(dx))


def grad_a_minus_2div_alpha_closed(s: FlowState) -> VectorField:
    """Closed form 2 a Delta(aux) d(aux) for the coupled flows, zero otherwise."""
    n = s.grid.n_points
    if s.kind.aux_name is None:
        return VectorField(np.zeros(n), np.zeros(n))
    g, w = s.metric, s.aux
    dx = 2 * s.kind.coupling(s.time) * geo.laplace_beltrami(g, w) * geo.ddx(w, g.grid.h)
    return VectorField(dx, np.zeros(n))


def b_minus_delta_a_closed(s: FlowState) -> np.ndarray:
    """B - Delta A from the per-flow closed forms.

    Zero for the static metric and for Ricci flow; 2 a (Delta v)^2 for List's
    flow and 2 a |tau phi|^2 - a' |grad phi|^2 for the harmonic-map coupling.
    """
    if s.kind.aux_name is None:
        return np.zeros(s.grid.n_points)
    g, w = s.metric, s.aux
    lap = geo.laplace_beltrami(g, w)
    return (2 * s.kind.coupling(s.time) * lap**2
            - s.kind.coupling_rate() * geo.grad_norm_sq(g, w))


def theta_general(s: FlowState, v: VectorField, bmda) -> np.ndarray:
    """(Rc - alpha)(V,V) + <nabla A - 2 Div alpha, V> + (B - Delta A)/2."""
    g = s.metric
    rc_minus = geo.ricci(g) - alpha(s)
    cov = grad_a_minus_2div_alpha(s)
    return geo.tensor_apply(g, rc_minus, v) + cov.x * v.x + cov.y * v.y + 0.5 * bmda


def theta_closed(s: FlowState, v: VectorField) -> np.ndarray:
    g = s.metric
    tag = s.kind.tag
    if tag == "static":
        return geo.tensor_apply(g, geo.ricci(g), v)
    if tag == "ricci":
        return np.zeros(s.grid.n_points)
    w = s.aux
    directional = geo.ddx(w, g.grid.h) * v.x
    square = (directional + geo.laplace_beltrami(g, w)) ** 2
    return (s.kind.coupling(s.time) * square
            - 0.5 * s.kind.coupling_rate() * geo.grad_norm_sq(g, w))


# -- time evolution ---------------------------------------------------------

def auto_dt(metric: DiagonalMetric, cfl: float = DEFAULT_CFL) -> float:
    """Explicit-diffusion step bound cfl * h^2 * min(a).

    Every evolved quantity diffuses with coefficient 1/a in x, so no other
    coefficient enters the bound.
    """
    return cfl * metric.grid.h**2 * float(metric.a.min())


@dataclass(frozen=True)
class FlowTrajectory:
    """Flow states stored every dt/2.

    Fields are stacked row-wise: ``a[i]`` is the metric component at
    ``times[i]``.  Full steps sit at even indices.
    """

    grid: GridSpec
    kind: FlowKind
    dt: float
    times: np.ndarray
    a: np.ndarray
    b: np.ndarray
    aux: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.times)

    def state(self, i) -> FlowState:
        if not -len(self) <= i < len(self):
            raise IndexError(f"state index {i} out of range for {len(self)} states")
        aux = None if self.aux is None else self.aux[i]
        return make_state(self.kind, DiagonalMetric(self.grid, self.a[i], self.b[i]),
                          aux, float(self.times[i]))

    def states(self):
        return [self.state(i) for i in range(len(self))]

    @property
    def n_full(self) -> int:
        """Number of full-step states (indices 0, 2, 4, ...)."""
        return (len(self) + 1) // 2

    @property
    def full_times(self) -> np.ndarray:
        return self.times[::2]

    def full_state(self, j) -> FlowState:
        return self.state(2 * j)


def _rhs(kind, grid, t, a, b, aux):
    metric = DiagonalMetric(grid, a, b)
    s = make_state(kind, metric, aux, t)
    al = alpha(s)
    daux = None if aux is None else geo.laplace_beltrami(metric, aux)
    return -2 * al.xx, -2 * al.yy, daux


def _check_finite_positive(t, a, b, aux):
    fields = [a, b] if aux is None else [a, b, aux]
    if not all(np.all(np.isfinite(f)) for f in fields):
        raise BlowUpError("non-finite values in flow state", t)
    if min(a.min(), b.min()) < geo.MIN_METRIC:
        raise BlowUpError("metric lost positivity", t)


def evolve(initial: FlowState, t_end: float, dt: Optional[float] = None,
           cfl: float = DEFAULT_CFL) -> FlowTrajectory:
    """Integrate the coupled system with classical RK4 and half-step storage.

    The integrator advances with step dt/2 and records every step, so a
    downstream RK4 solve with step dt finds the metric at t, t + dt/2 and
    t + dt without interpolation.  ``dt`` defaults to :func:`auto_dt`; it is
    shrunk slightly if needed so that the run ends exactly at ``t_end``.
    """
    t0 = initial.time
    if not t_end > t0:
        raise ConfigurationError(f"t_end = {t_end} must exceed the initial time {t0}")
    initial.kind.check_horizon(t_end)
    if dt is None:
        dt = auto_dt(initial.metric, cfl)
    if not dt > 0:
        raise ConfigurationError("dt must be positive")
    n_full = int(np.ceil((t_end - t0) / dt - 1e-9))
    dt = (t_end - t0) / n_full
    n_half = 2 * n_full
    hs = dt / 2

    grid, kind = initial.grid, initial.kind
    n = grid.n_points
    a_out = np.empty((n_half + 1, n))
    b_out = np.empty((n_half + 1, n))
    aux_out = None if initial.aux is None else np.empty((n_half + 1, n))
    times = t0 + hs * np.arange(n_half + 1)

    a, b = initial.metric.a.copy(), initial.metric.b.copy()
    aux = None if initial.aux is None else np.array(initial.aux, dtype=float)
    a_out[0], b_out[0] = a, b
    if aux is not None:
        aux_out[0] = aux

    def shifted(x, k, c):
        return None if x is None else x + c * k

    for i in range(n_half):
        t = times[i]
        try:
            k1 = _rhs(kind, grid, t, a, b, aux)
            k2 = _rhs(kind, grid, t + hs / 2, *(shifted(x, k, hs / 2) for x, k in zip((a, b, aux), k1)))
            k3 = _rhs(kind, grid, t + hs / 2, *(shifted(x, k, hs / 2) for x, k in zip((a, b, aux), k2)))
            k4 = _rhs(kind, grid, t + hs, *(shifted(x, k, hs) for x, k in zip((a, b, aux), k3)))
        except geo.InvalidMetricError as exc:
            raise BlowUpError(f"intermediate stage invalid: {exc}", t) from exc
        a = a + hs / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        b = b + hs / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if aux is not None:
            aux = aux + hs / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        _check_finite_positive(times[i + 1], a, b, aux)
        a_out[i + 1], b_out[i + 1] = a, b
        if aux is not None:
            aux_out[i + 1] = aux

    return FlowTrajectory(grid, kind, dt, times, a_out, b_out, aux_out)


def b_minus_delta_a_numeric(traj: FlowTrajectory, index: int) -> np.ndarray:
    """B - Delta A with B = dA/dt - 2|alpha|^2 and dA/dt a central difference.

    The neighbours ``index - 1`` and ``index + 1`` are half steps away, so the
    difference spans one full dt.
    """
    if not 1 <= index <= len(traj) - 2:
        raise IndexError(f"index {index} needs both half-step neighbours (0 < index < {len(traj) - 1})")
    s = traj.state(index)
    dadt = (trace_a(traj.state(index + 1)) - trace_a(traj.state(index - 1))) / traj.dt
    g = s.metric
    return dadt - 2 * geo.tensor_norm_sq(g, alpha(s)) - geo.laplace_beltrami(g, trace_a(s))
