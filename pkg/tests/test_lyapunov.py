import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsfd import (
    NotLyapunovError,
    OdeSystem,
    QuadraticLyapunov,
    lyapunov_rate,
    lyapunov_value,
    make_state,
    tau_lyapunov_bound,
)

decay = OdeSystem(1, lambda y: (-y[0],), (0.0,))
unit1 = QuadraticLyapunov((1.0,), (0.0,))


def test_make_state_rejects_nonfinite_and_bad_length():
    with pytest.raises(ValueError):
        make_state([1.0, math.nan])
    with pytest.raises(ValueError):
        make_state([1.0, math.inf])
    with pytest.raises(ValueError):
        make_state([1.0, 2.0], dimension=3)
    with pytest.raises(ValueError):
        make_state([])
    assert make_state(np.array([1, 2])) == (1.0, 2.0)


def test_system_checks_equilibrium():
    with pytest.raises(ValueError):
        OdeSystem(1, lambda y: (1.0 - y[0],), (0.0,))
    with pytest.raises(ValueError):
        OdeSystem(2, lambda y: (0.0,), (0.0, 0.0))


def test_lyapunov_rejects_nonpositive_alphas():
    with pytest.raises(ValueError):
        QuadraticLyapunov((1.0, 0.0), (0.0, 0.0))
    with pytest.raises(ValueError):
        QuadraticLyapunov((1.0,), (0.0, 0.0))


@pytest.mark.parametrize(
    "alphas, center, y, expected",
    [
        ((1, 1), (0, 0), (0, 0), 0.0),
        ((1, 1), (0, 0), (0.5, 0.01), 0.2501),
        ((2, 3), (1, -1), (2, 1), 14.0),
    ],
)
def test_lyapunov_value_examples(alphas, center, y, expected):
    assert lyapunov_value(QuadraticLyapunov(alphas, center), y) == pytest.approx(expected, rel=1e-15)


def test_lyapunov_value_dimension_mismatch():
    with pytest.raises(ValueError):
        lyapunov_value(unit1, (1.0, 2.0))


def test_rate_examples(osc):
    assert lyapunov_rate(osc.lyapunov, osc.system, (0.0, 0.0)) == 0.0
    assert lyapunov_rate(osc.lyapunov, osc.system, (0.5, 0.01)) == pytest.approx(-0.020000002, rel=1e-14)
    assert lyapunov_rate(unit1, decay, (3.0,)) == -18.0


def test_tau_bound_examples(osc):
    # exact rational value 12.505003749500124 (scripts/derive_oracle_values.py)
    assert tau_lyapunov_bound(osc.lyapunov, osc.system, (0.5, 0.01)) == pytest.approx(12.505003749500124, rel=1e-13)
    assert tau_lyapunov_bound(unit1, decay, (3.0,)) == pytest.approx(0.5)


def test_tau_bound_errors(osc):
    with pytest.raises(ValueError, match="equilibrium"):
        tau_lyapunov_bound(osc.lyapunov, osc.system, (0.0, 0.0))
    # f vanishes on the whole diagonal, only the origin is the designated equilibrium
    flat = OdeSystem(2, lambda y: (y[1] - y[0], y[0] - y[1]), (0.0, 0.0))
    with pytest.raises(NotLyapunovError):
        tau_lyapunov_bound(QuadraticLyapunov((1, 1), (0, 0)), flat, (1.0, 1.0))
    # V increasing along the flow
    grow = OdeSystem(1, lambda y: (y[0],), (0.0,))
    with pytest.raises(NotLyapunovError):
        tau_lyapunov_bound(unit1, grow, (1.0,))


@settings(max_examples=200)
@given(
    alphas=st.lists(st.floats(1e-3, 1e3), min_size=3, max_size=3),
    center=st.lists(st.floats(-10, 10), min_size=3, max_size=3),
    offset=st.lists(st.floats(-10, 10), min_size=3, max_size=3),
)
def test_value_zero_only_at_center(alphas, center, offset):
    V = QuadraticLyapunov(alphas, center)
    assert lyapunov_value(V, center) == 0.0
    y = [c + o for c, o in zip(center, offset)]
    # only differences whose square does not underflow are visible to V
    if max(abs(a - b) for a, b in zip(y, center)) > 1e-150:
        assert lyapunov_value(V, y) > 0.0


def random_states(rng, count, scale=10.0):
    return [tuple(p) for p in rng.uniform(-scale, scale, size=(count, 2))]


def test_tau_bound_nonnegative(osc, rng):
    for y in random_states(rng, 1000):
        assert tau_lyapunov_bound(osc.lyapunov, osc.system, y) >= 0.0


def test_rate_matches_closed_form(osc, rng):
    A, D = osc.params["A"], osc.params["D"]
    a1, a2 = osc.lyapunov.alphas
    for y1, y2 in random_states(rng, 1000):
        closed = -2 * a1 * A * y1**4 - 2 * a2 * D * y2**4
        assert lyapunov_rate(osc.lyapunov, osc.system, (y1, y2)) == pytest.approx(closed, rel=1e-12)


@pytest.mark.parametrize("c", [1e-3, 0.5, 7.0, 1e3])
def test_scaling_alphas(osc, rng, c):
    V = osc.lyapunov
    Vc = QuadraticLyapunov(tuple(c * a for a in V.alphas), V.center)
    for y in random_states(rng, 200):
        assert lyapunov_rate(Vc, osc.system, y) == pytest.approx(c * lyapunov_rate(V, osc.system, y), rel=1e-12)
        assert tau_lyapunov_bound(Vc, osc.system, y) == pytest.approx(
            tau_lyapunov_bound(V, osc.system, y), rel=1e-12
        )
