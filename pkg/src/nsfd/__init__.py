"""Explicit nonstandard finite difference schemes that keep a quadratic
Lyapunov function decreasing and the nonnegative orthant invariant at any
step size, plus classical baselines and an experiment harness."""

from .lyapunov import (
    NotLyapunovError,
    OdeSystem,
    QuadraticLyapunov,
    State,
    lyapunov_rate,
    lyapunov_value,
    make_state,
    tau_lyapunov_bound,
)
from .positivity import (
    QuasiPositivityError,
    check_quasi_positivity,
    tau_combined,
    tau_positivity,
    tau_star,
)
from .problems import (
    GhaffariSystem,
    LinearDecay1D,
    Problem,
    decay2_system,
    exchange_system,
    ghaffari_lyapunov,
    ghaffari_rhs,
    ghaffari_tau_L,
    make_problem,
)
from .reference import (
    EULER,
    RK2,
    RK4,
    OneStepMethod,
    euler_step,
    integrate_with,
    rk2_trapezoidal_step,
    rk4_step,
)
from .stepper import (
    EXPONENTIAL,
    IDENTITY,
    DenominatorFunction,
    NonFiniteError,
    NsfdScheme,
    StepError,
    Trajectory,
    WeightFunction,
    delta_v_closed_form,
    delta_v_direct,
    integrate,
    nsfd_step,
)

__version__ = "0.1.0"
