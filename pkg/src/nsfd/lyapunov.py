"""ODE systems, quadratic Lyapunov functions and the Lyapunov weight bound.

States are plain tuples of floats.  The systems studied here are small
(n = 1 or 2) and are stepped millions of times, so per-call overhead of
numpy arrays would dominate; tuples also give immutability for free.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

State = tuple[float, ...]
Rhs = Callable[[State], Sequence[float]]

EQUILIBRIUM_TOL = 1e-12


class NotLyapunovError(ValueError):
    """Raised when the supplied quadratic function does not strictly decrease."""


def make_state(values: Sequence[float], dimension: int | None = None) -> State:
    """Validate ``values`` and return them as an immutable state tuple."""
    state = tuple(float(v) for v in values)
    if not state:
        raise ValueError("state must have at least one component")
    if dimension is not None and len(state) != dimension:
        raise ValueError(f"state has length {len(state)}, expected {dimension}")
    if not all(math.isfinite(v) for v in state):
        raise ValueError(f"state has non-finite components: {state}")
    return state


def max_distance(y: Sequence[float], z: Sequence[float]) -> float:
    return max(abs(a - b) for a, b in zip(y, z))


@dataclass(frozen=True)
class OdeSystem:
    """Autonomous system ``y' = f(y)`` with a designated equilibrium."""

    dimension: int
    rhs: Rhs
    equilibrium: State
    name: str = "system"

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        object.__setattr__(self, "equilibrium", make_state(self.equilibrium, self.dimension))
        residual = self.f(self.equilibrium)
        if max(abs(v) for v in residual) > EQUILIBRIUM_TOL:
            raise ValueError(f"{self.name}: f(equilibrium) = {residual} is not zero")

    def f(self, y: State) -> State:
        out = tuple(self.rhs(y))
        if len(out) != self.dimension:
            raise ValueError(f"rhs returned {len(out)} components, expected {self.dimension}")
        return out

    def is_equilibrium(self, y: State) -> bool:
        """True when ``y`` is within the max-norm guard of the equilibrium."""
        scale = 1.0 + max(abs(v) for v in self.equilibrium)
        return max_distance(y, self.equilibrium) <= EQUILIBRIUM_TOL * scale


@dataclass(frozen=True)
class QuadraticLyapunov:
    """``V(y) = sum_i alpha_i (y_i - center_i)^2`` with all ``alpha_i > 0``."""

    alphas: tuple[float, ...]
    center: State

    def __post_init__(self):
        alphas = make_state(self.alphas)
        center = make_state(self.center)
        if len(alphas) != len(center):
            raise ValueError("alphas and center must have the same length")
        if any(a <= 0 for a in alphas):
            raise ValueError(f"Lyapunov coefficients must be positive, got {alphas}")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "center", center)

    @property
    def dimension(self) -> int:
        return len(self.alphas)

    def __call__(self, y: Sequence[float]) -> float:
        return lyapunov_value(self, y)


def _check_dim(V: QuadraticLyapunov, y: Sequence[float]) -> None:
    if len(y) != V.dimension:
        raise ValueError(f"state has length {len(y)}, Lyapunov function has dimension {V.dimension}")


def lyapunov_value(V: QuadraticLyapunov, y: Sequence[float]) -> float:
    _check_dim(V, y)
    return math.fsum(a * (yi - ci) * (yi - ci) for a, yi, ci in zip(V.alphas, y, V.center))


def _rate(V: QuadraticLyapunov, y: Sequence[float], fy: Sequence[float]) -> float:
    return 2.0 * math.fsum(a * (yi - ci) * fi for a, yi, ci, fi in zip(V.alphas, y, V.center, fy))


def lyapunov_rate(V: QuadraticLyapunov, sys: OdeSystem, y: Sequence[float]) -> float:
    """Derivative of ``V`` along the flow, ``2 sum_i alpha_i (y_i - y*_i) f_i(y)``."""
    _check_dim(V, y)
    if sys.dimension != V.dimension:
        raise ValueError("system and Lyapunov function dimensions differ")
    return _rate(V, y, sys.f(tuple(y)))


def _tau_bound(V: QuadraticLyapunov, sys: OdeSystem, y: State, fy: Sequence[float]) -> float:
    if sys.is_equilibrium(y):
        raise ValueError("bound undefined at equilibrium")
    rate = _rate(V, y, fy)
    if not rate < 0.0:
        raise NotLyapunovError(
            f"Lyapunov rate {rate!r} not strictly negative at {y}: "
            "V is not a valid strict Lyapunov function here"
        )
    num = math.fsum(a * fi * fi for a, fi in zip(V.alphas, fy))
    return -num / rate


def tau_lyapunov_bound(V: QuadraticLyapunov, sys: OdeSystem, y: Sequence[float]) -> float:
    """Smallest weight for which the NSFD step decreases ``V`` at ``y``.

    Equals ``-sum_i alpha_i f_i(y)^2 / Vdot(y)``.  Raises ``ValueError`` at
    the equilibrium and ``NotLyapunovError`` where ``Vdot(y) >= 0``.
    """
    _check_dim(V, y)
    y = tuple(y)
    return _tau_bound(V, sys, y, sys.f(y))
