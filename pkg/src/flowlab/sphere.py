"""Closed-form round sphere S^n under Ricci flow.

g(t) = s(t) g_unit with s(t) = s0 - 2(n-1) t.  Every field is spatially
constant, so the conjugate heat solution is u = 1/V(t), the ground state of
-Delta + cR is V^(-1/2), and every integral reduces to a product.  The values
below are obtained by substituting these constant fields into the general
integrands, not from tabulated answers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class SphereState:
    dim: int
    scale: float
    vol_unit: float = 4 * np.pi
    time: float = 0.0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("sphere dimension must be at least 2")
        if not self.scale > 0:
            raise DomainError(f"sphere scale must be positive, got {self.scale}")

    @property
    def volume(self) -> float:
        return self.vol_unit * self.scale ** (self.dim / 2)

    @property
    def scalar_curvature(self) -> float:
        return self.dim * (self.dim - 1) / self.scale

    @property
    def ricci_factor(self) -> float:
        """Rc = ricci_factor * g."""
        return (self.dim - 1) / self.scale

    @property
    def ricci_norm_sq(self) -> float:
        """|Rc|^2 = n ((n-1)/s)^2."""
        return self.dim * self.ricci_factor**2

    @property
    def blowup_time(self) -> float:
        """Absolute time at which the scale reaches zero."""
        return self.time + self.scale / (2 * (self.dim - 1))


def sphere_flow(s0: float, n: int, t: float, vol_unit: float = 4 * np.pi) -> SphereState:
    t_star = s0 / (2 * (n - 1))
    if t >= t_star:
        raise DomainError(f"t = {t} is past the blow-up time {t_star}")
    return SphereState(n, s0 - 2 * (n - 1) * t, vol_unit, t)


def theta_static(state: SphereState, v_norm_sq: float) -> float:
    """Theta(V) = Rc(V, V) for the sphere held static at this scale."""
    return state.ricci_factor * v_norm_sq


@dataclass(frozen=True)
class SphereReport:
    E: float
    E1: float
    E2: float
    F_k: float
    dF_k: float
    lam: float
    lam_prime: float
    lam_bar: float
    W: Optional[float]
    dW: Optional[float]
    W_plus: Optional[float] = None
    dW_plus: Optional[float] = None


def sphere_reports(state: SphereState, c: float, k: float, T_ref: Optional[float] = None,
                   T_ref_plus: Optional[float] = None) -> SphereReport:
    """All functionals for u = 1/V, f = V^(-1/2), alpha = Rc, A = R.

    With constant fields Theta = 0 and B - Delta A = 0, so
    E = -log V, E' = R, E'' = 2|Rc|^2, F_k = kR, dF_k/dt = 2k|Rc|^2, lambda = cR and
    lambda' = 2c|Rc|^2.  W uses tau = T_ref - t and is constant in t exactly
    when T_ref is the blow-up time (the sphere is then a shrinking soliton).
    """
    n = state.dim
    vol = state.volume
    r = state.scalar_curvature
    rc2 = state.ricci_norm_sq
    lam = c * r
    w = dw = wp = dwp = None
    if T_ref is not None:
        tau = T_ref - state.time
        if tau <= 0:
            raise DomainError(f"tau = {tau} must be positive")
        phi = np.log(vol) - n / 2 * np.log(4 * np.pi * tau)
        w = tau * r + phi - n
        # |Rc - g/(2 tau)|^2 = n ((n-1)/s - 1/(2 tau))^2
        dw = 2 * tau * n * (state.ricci_factor - 1 / (2 * tau)) ** 2
    if T_ref_plus is not None:
        sigma = state.time - T_ref_plus
        if sigma <= 0:
            raise DomainError(f"sigma = {sigma} must be positive")
        phi_p = np.log(vol) - n / 2 * np.log(4 * np.pi * sigma)
        wp = sigma * r - phi_p + n
        dwp = 2 * sigma * n * (state.ricci_factor + 1 / (2 * sigma)) ** 2
    return SphereReport(
        E=-np.log(vol),
        E1=r,
        E2=2 * rc2,
        F_k=k * r,
        dF_k=2 * k * rc2,
        lam=lam,
        lam_prime=2 * c * rc2,
        lam_bar=lam * vol ** (2 / n),
        W=w, dW=dw, W_plus=wp, dW_plus=dwp,
    )
