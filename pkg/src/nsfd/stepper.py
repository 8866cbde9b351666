"""Explicit NSFD update, weight functions and the time-stepping loop."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .lyapunov import (
    OdeSystem,
    QuadraticLyapunov,
    State,
    _rate,
    _tau_bound,
    lyapunov_value,
    make_state,
)

DEFAULT_MARGIN = 0.001

Observer = Callable[[int, float, State, Optional[float], Optional[float]], None]


class StepError(RuntimeError):
    """A step failed; ``step`` is the index of the state being advanced."""

    def __init__(self, step: int, cause: Exception):
        super().__init__(f"step {step}: {cause}")
        self.step = step
        self.cause = cause


class NonFiniteError(ArithmeticError):
    pass


@dataclass(frozen=True)
class DenominatorFunction:
    """Step-size transform ``phi(dt) = dt + O(dt^2)``, positive for ``dt > 0``."""

    name: str
    fn: Callable[[float], float]

    def __call__(self, dt: float) -> float:
        return self.fn(dt)


IDENTITY = DenominatorFunction("identity", lambda dt: dt)
EXPONENTIAL = DenominatorFunction("exponential", lambda dt: -math.expm1(-dt))

DENOMINATORS = {d.name: d for d in (IDENTITY, EXPONENTIAL)}


def denominator(name: str) -> DenominatorFunction:
    try:
        return DENOMINATORS[name]
    except KeyError:
        raise ValueError(f"unknown denominator function {name!r}; choose from {sorted(DENOMINATORS)}") from None


@dataclass(frozen=True)
class WeightFunction:
    """Scalar weight ``tau(y) >= 0`` of the non-local zero approximation.

    ``fn`` receives the state and the already-evaluated right-hand side so
    the stepper evaluates ``f`` once per step.
    """

    name: str
    fn: Callable[[State, State], float]

    def __call__(self, y: Sequence[float], fy: Sequence[float] | None = None, system: OdeSystem | None = None) -> float:
        y = tuple(y)
        if fy is None:
            if system is None:
                raise ValueError("need either fy or system to evaluate the weight")
            fy = system.f(y)
        return self.fn(y, tuple(fy))

    @classmethod
    def from_lyapunov_bound(cls, V: QuadraticLyapunov, sys: OdeSystem, margin: float = DEFAULT_MARGIN) -> "WeightFunction":
        """``tau_L + margin``; infinite inside the equilibrium guard."""
        _check_margin(margin)

        def fn(y, fy):
            if sys.is_equilibrium(y):
                return math.inf
            return _tau_bound(V, sys, y, fy) + margin

        return cls(f"lyapunov+{margin:g}", fn)

    @classmethod
    def from_positivity_bound(cls, sys: OdeSystem, margin: float = DEFAULT_MARGIN) -> "WeightFunction":
        from .positivity import _tau_positivity

        _check_margin(margin)
        return cls(f"positivity+{margin:g}", lambda y, fy: _tau_positivity(y, fy) + margin)

    @classmethod
    def combined(cls, V: QuadraticLyapunov, sys: OdeSystem, margin: float = DEFAULT_MARGIN) -> "WeightFunction":
        from .positivity import _tau_positivity

        _check_margin(margin)

        def fn(y, fy):
            if sys.is_equilibrium(y):
                return math.inf
            return max(_tau_bound(V, sys, y, fy), _tau_positivity(y, fy)) + margin

        return cls(f"combined+{margin:g}", fn)

    @classmethod
    def constant(cls, value: float) -> "WeightFunction":
        _check_margin(value)
        return cls(f"constant:{value:g}", lambda y, fy: value)

    @classmethod
    def custom(cls, fn: Callable[[State], float], name: str = "custom") -> "WeightFunction":
        return cls(name, lambda y, fy: fn(y))

    def plus(self, g: float) -> "WeightFunction":
        _check_margin(g)
        inner = self.fn
        return WeightFunction(f"{self.name}+{g:g}", lambda y, fy: inner(y, fy) + g)


def _check_margin(g: float) -> None:
    if not (g >= 0 and math.isfinite(g)):
        raise ValueError(f"margin must be finite and nonnegative, got {g!r}")


@dataclass(frozen=True)
class NsfdScheme:
    system: OdeSystem
    tau: WeightFunction
    phi: DenominatorFunction = IDENTITY

    def step(self, y: Sequence[float], dt: float) -> State:
        return nsfd_step(self, y, dt)


def _increment_factor(scheme: NsfdScheme, y: State, fy: State, dt: float) -> float:
    """``phi / (1 + phi tau)``; zero when the denominator overflows."""
    phi = scheme.phi(dt)
    tau = scheme.tau.fn(y, fy)
    if tau < 0:
        raise ValueError(f"weight must be nonnegative, got tau={tau!r} at {y}")
    denom = 1.0 + phi * tau
    if math.isinf(denom):
        return 0.0
    return phi / denom


def _advance(scheme: NsfdScheme, y: State, fy: State, dt: float) -> State:
    if not all(map(math.isfinite, fy)):
        raise NonFiniteError(f"non-finite rhs {fy} at {y}")
    if not any(fy):
        return y
    c = _increment_factor(scheme, y, fy, dt)
    if c == 0.0:
        return y
    return tuple(yi + c * fi for yi, fi in zip(y, fy))


def _check_dt(dt: float) -> None:
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError(f"step size must be positive and finite, got {dt!r}")


def nsfd_step(scheme: NsfdScheme, y: Sequence[float], dt: float) -> State:
    """One explicit NSFD step ``y + phi f(y) / (1 + phi tau(y))``.

    If ``f(y) = 0`` the state is returned unchanged before the weight is
    evaluated, so weights that are singular at the equilibrium are safe.
    """
    _check_dt(dt)
    y = make_state(y, scheme.system.dimension)
    out = _advance(scheme, y, scheme.system.f(y), dt)
    if not all(map(math.isfinite, out)):
        raise NonFiniteError(f"NSFD step from {y} produced {out}")
    return out


def _diff_squares(V: QuadraticLyapunov, new: State, old: State) -> float:
    # V(new) - V(old) summed termwise as alpha (new - old)(new + old - 2c)
    return math.fsum(
        a * (n - o) * ((n - c) + (o - c)) for a, n, o, c in zip(V.alphas, new, old, V.center)
    )


def delta_v_direct(V: QuadraticLyapunov, scheme: NsfdScheme, y: Sequence[float], dt: float) -> float:
    """``V(next) - V(y)`` for the NSFD step from ``y``."""
    y = make_state(y, scheme.system.dimension)
    return _diff_squares(V, nsfd_step(scheme, y, dt), y)


def delta_v_closed_form(V: QuadraticLyapunov, scheme: NsfdScheme, y: Sequence[float], dt: float) -> float:
    """``c (Vdot(y) + c sum_i alpha_i f_i^2)`` with ``c = phi / (1 + phi tau)``."""
    _check_dt(dt)
    y = make_state(y, scheme.system.dimension)
    fy = scheme.system.f(y)
    if not any(fy):
        return 0.0
    c = _increment_factor(scheme, y, fy, dt)
    sq = math.fsum(a * fi * fi for a, fi in zip(V.alphas, fy))
    return c * (_rate(V, y, fy) + c * sq)


@dataclass
class Trajectory:
    """States ``y^0 .. y^K`` on the grid ``t_k = k dt``.

    ``diverged_at`` is the index of the step that produced a non-finite
    value, in which case ``states`` stops at the last finite iterate.
    With ``store=False`` only the first and last states are kept.
    """

    dt: float
    states: list[State] = field(default_factory=list)
    steps_taken: int = 0
    diverged_at: int | None = None
    message: str = ""

    def __len__(self):
        return len(self.states)

    def __getitem__(self, k):
        return self.states[k]

    def __iter__(self):
        return iter(self.states)

    @property
    def final(self) -> State:
        return self.states[-1]

    @property
    def final_time(self) -> float:
        return self.steps_taken * self.dt


def run_loop(
    advance: Callable[[State], State],
    y0: State,
    dt: float,
    steps: int,
    lyapunov: QuadraticLyapunov | None = None,
    observer: Observer | None = None,
    store: bool = True,
    stop_on_nonfinite: bool = False,
) -> Trajectory:
    """Shared fixed-step driver for NSFD and the reference methods."""
    _check_dt(dt)
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    traj = Trajectory(dt=dt, states=[y0])
    y = y0
    v = None if lyapunov is None else lyapunov_value(lyapunov, y)
    for k in range(steps):
        try:
            nxt = advance(y)
            if not all(map(math.isfinite, nxt)):
                raise NonFiniteError(f"non-finite state {nxt}")
        except NonFiniteError as exc:
            if not stop_on_nonfinite:
                raise StepError(k, exc) from exc
            traj.diverged_at = k
            traj.message = f"trajectory became non-finite at step {k} (t={k * dt:g}): {exc}"
            break
        except (ValueError, ArithmeticError) as exc:
            raise StepError(k, exc) from exc
        if observer is not None:
            dv = None if lyapunov is None else _diff_squares(lyapunov, nxt, y)
            observer(k, k * dt, y, v, dv)
        y = nxt
        v = None if lyapunov is None else lyapunov_value(lyapunov, y)
        traj.steps_taken = k + 1
        if store:
            traj.states.append(y)
    if not store and traj.steps_taken:
        traj.states.append(y)
    if observer is not None:
        observer(traj.steps_taken, traj.steps_taken * dt, y, v, None)
    return traj


def integrate(
    scheme: NsfdScheme,
    y0: Sequence[float],
    dt: float,
    steps: int,
    observer: Observer | None = None,
    lyapunov: QuadraticLyapunov | None = None,
    store: bool = True,
) -> Trajectory:
    """Apply ``nsfd_step`` ``steps`` times starting from ``y0``.

    The observer is called as ``observer(k, t_k, y_k, V(y_k), dV(y_k))`` for
    ``k = 0 .. steps``; ``V`` and ``dV`` are ``None`` without ``lyapunov``
    and ``dV`` is ``None`` on the final call.  Step failures are re-raised as
    :class:`StepError` carrying the step index.
    """
    sys = scheme.system
    y0 = make_state(y0, sys.dimension)
    f = sys.f

    def advance(y):
        return _advance(scheme, y, f(y), dt)

    return run_loop(advance, y0, dt, steps, lyapunov, observer, store)
