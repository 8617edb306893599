"""Entropy and eigenvalue monotonicity under Ricci-type flows on the two-torus.

The grid backend discretizes x-dependent diagonal metrics g = a dx^2 + b dy^2;
the sphere backend gives closed-form values for the shrinking round sphere.
"""
from .errors import FlowLabError
from .flows import FlowKind, FlowState, evolve, make_state
from .geometry import DiagonalMetric, GridSpec
from .heat import solve_backward

__version__ = "0.1.0"

__all__ = [
    "DiagonalMetric",
    "FlowKind",
    "FlowLabError",
    "FlowState",
    "GridSpec",
    "evolve",
    "make_state",
    "solve_backward",
]
