"""Weights that keep NSFD iterates in the nonnegative orthant."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lyapunov import OdeSystem, QuadraticLyapunov, State, _tau_bound, make_state

QUASI_POSITIVITY_TOL = 1e-12


class QuasiPositivityError(ValueError):
    pass


def _tau_star(y: State, fy: State, i: int) -> float:
    fi = fy[i]
    if fi >= 0:
        return 0.0
    yi = y[i]
    if yi < 0:
        raise ValueError(f"state {y} lies outside the nonnegative orthant")
    if yi == 0:
        raise QuasiPositivityError(
            f"system violates quasi-positivity at {y}: f_{i + 1} = {fi!r} < 0 on the face y_{i + 1} = 0"
        )
    return -fi / yi


def _tau_positivity(y: State, fy: State) -> float:
    return max(_tau_star(y, fy, i) for i in range(len(y)))


def tau_star(sys: OdeSystem, y: Sequence[float], i: int) -> float:
    """Per-component positivity bound: 0 if ``f_i(y) >= 0`` else ``-f_i(y) / y_i``.

    ``i`` is a zero-based component index.
    """
    y = make_state(y, sys.dimension)
    if not 0 <= i < sys.dimension:
        raise IndexError(f"component {i} out of range for dimension {sys.dimension}")
    return _tau_star(y, sys.f(y), i)


def tau_positivity(sys: OdeSystem, y: Sequence[float]) -> float:
    """``max_i tau_star(i)``, the smallest weight keeping the next iterate nonnegative."""
    y = make_state(y, sys.dimension)
    return _tau_positivity(y, sys.f(y))


def tau_combined(V: QuadraticLyapunov, sys: OdeSystem, y: Sequence[float], margin: float = 0.001) -> float:
    """``max(tau_L, tau_P) + margin``: both Lyapunov decrease and positivity hold."""
    if not (margin >= 0 and math.isfinite(margin)):
        raise ValueError(f"margin must be finite and nonnegative, got {margin!r}")
    y = make_state(y, sys.dimension)
    fy = sys.f(y)
    return max(_tau_bound(V, sys, y, fy), _tau_positivity(y, fy)) + margin


@dataclass(frozen=True)
class Violation:
    face: int
    point: State
    value: float


def check_quasi_positivity(
    sys: OdeSystem, samples: int, box: Sequence[float], seed: int = 0
) -> list[Violation]:
    """Sample each face ``y_i = 0`` of the box and report points where ``f_i < 0``.

    An empty list means no counterexample was found, not that the condition
    holds everywhere.
    """
    box = [float(b) for b in box]
    if len(box) != sys.dimension:
        raise ValueError(f"box has {len(box)} bounds, expected {sys.dimension}")
    if not all(b > 0 and math.isfinite(b) for b in box):
        raise ValueError("box bounds must be positive and finite")
    rng = np.random.default_rng(seed)
    found = []
    for i in range(sys.dimension):
        pts = rng.uniform(0.0, 1.0, size=(samples, sys.dimension)) * box
        pts[:, i] = 0.0
        for p in pts:
            point = tuple(float(v) for v in p)
            value = sys.f(point)[i]
            if value < -QUASI_POSITIVITY_TOL:
                found.append(Violation(i, point, value))
    return found
