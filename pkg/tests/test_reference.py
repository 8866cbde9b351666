import math

import numpy as np
import pytest

from nsfd import (
    EULER,
    RK2,
    RK4,
    NsfdScheme,
    OdeSystem,
    WeightFunction,
    euler_step,
    integrate,
    integrate_with,
    rk2_trapezoidal_step,
    rk4_step,
)
from nsfd.problems import LinearDecay1D

decay = LinearDecay1D(1.0)


@pytest.mark.parametrize("step", [euler_step, rk2_trapezoidal_step, rk4_step])
@pytest.mark.parametrize("dt", [1e-6, 1.0, 1e3])
def test_fixed_point(osc, step, dt):
    assert step(osc.system, (0.0, 0.0), dt) == (0.0, 0.0)


def test_hand_values():
    sys = decay.system()
    assert euler_step(sys, (2.0,), 0.5) == (1.0,)
    # Heun on y' = -y is exactly 2 (1 - h + h^2/2): k1 = -2, k2 = f(2 - 1) = -1
    assert rk2_trapezoidal_step(sys, (2.0,), 0.5) == (1.25,)
    # 1 - h + h^2/2 - h^3/6 + h^4/24 at h = 0.1
    assert rk4_step(sys, (1.0,), 0.1)[0] == pytest.approx(0.9048375, rel=1e-14)


def test_nonfinite_rhs():
    bad = OdeSystem(1, lambda y: (math.nan if y[0] else 0.0,), (0.0,))
    with pytest.raises(ArithmeticError):
        euler_step(bad, (1.0,), 0.1)


def observed_order(method, dts=(0.1, 0.05, 0.025), T=1.0):
    sys = decay.system()
    errs = []
    for dt in dts:
        y = integrate_with(method, sys, (1.0,), dt, round(T / dt), store=False).final
        errs.append(abs(y[0] - decay.exact((1.0,), T)[0]))
    return float(np.polyfit(np.log(dts), np.log(errs), 1)[0])


@pytest.mark.parametrize("method, order", [(EULER, 1), (RK2, 2), (RK4, 4)])
def test_convergence_order(method, order):
    assert abs(observed_order(method) - order) <= 0.3


def test_integrate_with_basics(osc):
    one = integrate_with(RK4, osc.system, (0.5, 0.01), 0.1, 1)
    assert one[1] == rk4_step(osc.system, (0.5, 0.01), 0.1)
    assert one.diverged_at is None


def test_divergence_truncates():
    sys = OdeSystem(1, lambda y: (y[0] * y[0] * y[0],), (0.0,))
    traj = integrate_with(EULER, sys, (2.0,), 1.0, 100)
    assert traj.diverged_at is not None
    assert len(traj) == traj.diverged_at + 1
    assert all(math.isfinite(v) for y in traj for v in y)
    assert "non-finite" in traj.message


@pytest.mark.parametrize("method", [EULER, RK2])
def test_lyapunov_violated_at_large_step(osc, method):
    traj = integrate_with(method, osc.system, (0.5, 0.01), 0.8, 2000)
    vs = [osc.lyapunov(y) for y in traj]
    assert any(b > a for a, b in zip(vs, vs[1:]))


def test_rk4_reference_spirals_in(osc):
    traj = integrate_with(RK4, osc.system, (0.5, 0.01), 1e-3, 100_000, store=False)
    assert osc.lyapunov(traj.final) < osc.lyapunov((0.5, 0.01))
    # winding: y1 changes sign repeatedly on the way in
    signs = []
    integrate_with(RK4, osc.system, (0.5, 0.01), 0.01, 10_000,
                   observer=lambda k, t, y, v, dv: signs.append(y[0] > 0), store=False)
    assert sum(a != b for a, b in zip(signs, signs[1:])) >= 4


def test_euler_matches_zero_weight_nsfd(osc, rng):
    scheme = NsfdScheme(osc.system, WeightFunction.constant(0.0))
    y0 = tuple(rng.uniform(-1, 1, 2))
    a = integrate(scheme, y0, 0.3, 200)
    b = integrate_with(EULER, osc.system, y0, 0.3, 200)
    assert a.states == b.states
