"""Classical explicit one-step methods used as baselines and reference solvers."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .lyapunov import OdeSystem, QuadraticLyapunov, State, make_state
from .stepper import NonFiniteError, Observer, Trajectory, _check_dt, run_loop


def _finite_f(sys: OdeSystem, y: State) -> State:
    fy = sys.f(y)
    if not all(map(math.isfinite, fy)):
        raise NonFiniteError(f"non-finite rhs {fy} at {y}")
    return fy


def _euler(sys, y, dt):
    k1 = _finite_f(sys, y)
    return tuple(yi + dt * a for yi, a in zip(y, k1))


def _rk2(sys, y, dt):
    k1 = _finite_f(sys, y)
    k2 = _finite_f(sys, tuple(yi + dt * a for yi, a in zip(y, k1)))
    h = 0.5 * dt
    return tuple(yi + h * (a + b) for yi, a, b in zip(y, k1, k2))


def _rk4(sys, y, dt):
    h = 0.5 * dt
    k1 = _finite_f(sys, y)
    k2 = _finite_f(sys, tuple(yi + h * a for yi, a in zip(y, k1)))
    k3 = _finite_f(sys, tuple(yi + h * b for yi, b in zip(y, k2)))
    k4 = _finite_f(sys, tuple(yi + dt * c for yi, c in zip(y, k3)))
    s = dt / 6.0
    return tuple(
        yi + s * (a + 2.0 * b + 2.0 * c + d) for yi, a, b, c, d in zip(y, k1, k2, k3, k4)
    )


def euler_step(sys: OdeSystem, y: Sequence[float], dt: float) -> State:
    """``y + dt f(y)``."""
    _check_dt(dt)
    return _euler(sys, make_state(y, sys.dimension), dt)


def rk2_trapezoidal_step(sys: OdeSystem, y: Sequence[float], dt: float) -> State:
    """Explicit trapezoidal rule (Heun): average of the slopes at ``y`` and at the Euler predictor."""
    _check_dt(dt)
    return _rk2(sys, make_state(y, sys.dimension), dt)


def rk4_step(sys: OdeSystem, y: Sequence[float], dt: float) -> State:
    _check_dt(dt)
    return _rk4(sys, make_state(y, sys.dimension), dt)


@dataclass(frozen=True)
class OneStepMethod:
    name: str
    order: int
    _step: Callable[[OdeSystem, State, float], State]

    def step(self, sys: OdeSystem, y: Sequence[float], dt: float) -> State:
        _check_dt(dt)
        return self._step(sys, make_state(y, sys.dimension), dt)


EULER = OneStepMethod("euler", 1, _euler)
RK2 = OneStepMethod("rk2", 2, _rk2)
RK4 = OneStepMethod("rk4", 4, _rk4)

METHODS = {m.name: m for m in (EULER, RK2, RK4)}
METHODS["rk2_trapezoidal"] = RK2


def method(name: str) -> OneStepMethod:
    try:
        return METHODS[name]
    except KeyError:
        raise ValueError(f"unknown method {name!r}; choose from {sorted(METHODS)}") from None


def integrate_with(
    method: OneStepMethod,
    sys: OdeSystem,
    y0: Sequence[float],
    dt: float,
    steps: int,
    observer: Observer | None = None,
    lyapunov: QuadraticLyapunov | None = None,
    store: bool = True,
) -> Trajectory:
    """Fixed-step integration that tolerates blow-up.

    When a stage or the new state becomes non-finite the trajectory is
    truncated at the last finite iterate and ``diverged_at`` / ``message``
    describe where it happened.
    """
    y0 = make_state(y0, sys.dimension)
    fn = method._step

    def advance(y):
        try:
            return fn(sys, y, dt)
        except OverflowError as exc:
            raise NonFiniteError(str(exc)) from exc

    return run_loop(advance, y0, dt, steps, lyapunov, observer, store, stop_on_nonfinite=True)
