"""Built-in benchmark systems.

``ghaffari`` is the planar cubic-damped oscillator

    y1' = -A y1^3 + B y2
    y2' = -C y1 - D y2^3

whose origin is globally asymptotically stable with Lyapunov function
``alpha1 y1^2 + alpha2 y2^2``, ``alpha1 = (C/B) alpha2``.  It is not
quasi-positive (``f2(y1, 0) = -C y1 < 0``), so the positivity machinery is
exercised on ``decay2`` and ``exchange`` instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .lyapunov import OdeSystem, QuadraticLyapunov, State, make_state

DEFAULT_PARAMS = (0.16, 1.0, 1.0, 0.1)
DEFAULT_Y0 = (0.5, 0.01)


@dataclass(frozen=True)
class GhaffariSystem:
    A: float = DEFAULT_PARAMS[0]
    B: float = DEFAULT_PARAMS[1]
    C: float = DEFAULT_PARAMS[2]
    D: float = DEFAULT_PARAMS[3]

    def __post_init__(self):
        for name in "ABCD":
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"parameter {name} must be positive, got {v!r}")

    def system(self) -> OdeSystem:
        return OdeSystem(2, lambda y: ghaffari_rhs(self, y), (0.0, 0.0), name="ghaffari")


def ghaffari_rhs(p: GhaffariSystem, y: Sequence[float]) -> State:
    if len(y) != 2:
        raise ValueError(f"ghaffari system is planar, got state of length {len(y)}")
    y1, y2 = y
    # products rather than ** so overflow gives inf instead of OverflowError
    return (-p.A * (y1 * y1 * y1) + p.B * y2, -p.C * y1 - p.D * (y2 * y2 * y2))


def ghaffari_lyapunov(p: GhaffariSystem, alpha2: float = 1.0) -> QuadraticLyapunov:
    if not alpha2 > 0:
        raise ValueError(f"alpha2 must be positive, got {alpha2!r}")
    return QuadraticLyapunov((p.C / p.B * alpha2, alpha2), (0.0, 0.0))


def ghaffari_tau_L(p: GhaffariSystem, alphas: Sequence[float], y: Sequence[float]) -> float:
    """Closed-form Lyapunov weight bound for this system.

    ``[a1 f1^2 + a2 f2^2] / (2 A a1 y1^4 + 2 D a2 y2^4)`` with
    ``f2 = -C y1 - D y2^3``.
    """
    y1, y2 = y
    if y1 == 0.0 and y2 == 0.0:
        raise ValueError("bound undefined at equilibrium")
    a1, a2 = alphas
    f1 = -p.A * y1**3 + p.B * y2
    f2 = -p.C * y1 - p.D * y2**3
    return (a1 * f1**2 + a2 * f2**2) / (2 * p.A * a1 * y1**4 + 2 * p.D * a2 * y2**4)


@dataclass(frozen=True)
class LinearDecay1D:
    """``y' = -rate y`` with exact solution ``y0 exp(-rate t)``."""

    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate!r}")

    def system(self) -> OdeSystem:
        lam = self.rate
        return OdeSystem(1, lambda y: (-lam * y[0],), (0.0,), name="linear")

    def exact(self, y0: Sequence[float], t: float) -> State:
        return (y0[0] * math.exp(-self.rate * t),)


def decay2_system(coupling: float = 0.5) -> OdeSystem:
    """Two linearly coupled decaying species, ``f_i = -y_i + coupling y_j``.

    Quasi-positive; the origin is GAS for ``0 <= coupling < 1`` with
    ``V = y1^2 + y2^2``.
    """
    if not 0 <= coupling < 1:
        raise ValueError("coupling must lie in [0, 1)")
    k = coupling
    return OdeSystem(2, lambda y: (-y[0] + k * y[1], -y[1] + k * y[0]), (0.0, 0.0), name="decay2")


def exchange_system() -> OdeSystem:
    """Symmetric exchange ``f = (y2 - y1, y1 - y2)``; every diagonal point is an equilibrium."""
    return OdeSystem(2, lambda y: (y[1] - y[0], y[0] - y[1]), (0.0, 0.0), name="exchange")


@dataclass(frozen=True)
class Problem:
    """A system bundled with its Lyapunov function and default initial data."""

    name: str
    system: OdeSystem
    lyapunov: QuadraticLyapunov
    y0: State
    params: dict = field(default_factory=dict)
    exact: Callable[[Sequence[float], float], State] | None = None


def make_problem(name: str, params: dict | None = None) -> Problem:
    params = dict(params or {})
    if name == "ghaffari":
        alpha2 = params.pop("alpha2", 1.0)
        p = GhaffariSystem(**params)
        return Problem(name, p.system(), ghaffari_lyapunov(p, alpha2), DEFAULT_Y0,
                       {"A": p.A, "B": p.B, "C": p.C, "D": p.D, "alpha2": alpha2})
    if name == "linear":
        p = LinearDecay1D(**params)
        return Problem(name, p.system(), QuadraticLyapunov((1.0,), (0.0,)), (1.0,),
                       {"rate": p.rate}, exact=p.exact)
    if name == "decay2":
        sys = decay2_system(**params)
        return Problem(name, sys, QuadraticLyapunov((1.0, 1.0), (0.0, 0.0)), (1.0, 0.5), params)
    if name == "exchange":
        if params:
            raise ValueError("exchange system takes no parameters")
        # V only decreases weakly here (zero on the diagonal)
        return Problem(name, exchange_system(), QuadraticLyapunov((1.0, 1.0), (0.0, 0.0)), (1.0, 0.0))
    raise ValueError(f"unknown problem {name!r}; choose from {PROBLEMS}")


PROBLEMS = ("ghaffari", "linear", "decay2", "exchange")


def as_state(values: Sequence[float], problem: Problem) -> State:
    return make_state(values, problem.system.dimension)
