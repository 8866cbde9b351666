"""Experiment configuration, CSV run records and the four experiment commands.

Each ``cmd_*`` function takes an :class:`ExperimentConfig`, writes its
report to ``stream`` and returns a process exit code:

    0 success, 1 config/validation error, 2 non-finite trajectory,
    3 property violation found.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from .lyapunov import OdeSystem, QuadraticLyapunov, State, make_state
from .positivity import check_quasi_positivity
from .problems import Problem, make_problem
from .reference import integrate_with, method as reference_method
from .stepper import (
    NonFiniteError,
    NsfdScheme,
    StepError,
    Trajectory,
    WeightFunction,
    delta_v_closed_form,
    delta_v_direct,
    denominator,
    integrate,
    nsfd_step,
)

EXIT_OK, EXIT_CONFIG, EXIT_NONFINITE, EXIT_VIOLATION = 0, 1, 2, 3

METHOD_IDS = ("nsfd", "euler", "rk2", "rk4")
WEIGHT_IDS = ("lyapunov", "positivity", "combined", "constant")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    problem: str = "ghaffari"
    params: dict = field(default_factory=dict)
    method: str = "nsfd"
    dt: float | None = None
    steps: int | None = None
    final_time: float | None = None
    y0: list[float] | None = None
    weight: str | None = None
    margin: float = 0.001
    phi: str = "identity"
    out: str | None = None
    seed: int = 0
    samples: int = 1000
    stride: int = 1
    methods: list[str] = field(default_factory=lambda: list(METHOD_IDS))
    dts: list[float] | None = None
    reference: str = "rk4"
    reference_dt: float = 1e-4
    description: str = ""

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def merged(self, **overrides) -> "ExperimentConfig":
        """Copy with every non-None override applied (flags beat the file)."""
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2)

    # validation helpers

    def get_problem(self) -> Problem:
        try:
            return make_problem(self.problem, self.params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def initial_state(self, problem: Problem) -> State:
        try:
            return make_state(self.y0 if self.y0 is not None else problem.y0, problem.system.dimension)
        except ValueError as exc:
            raise ConfigError(f"y0: {exc}") from exc

    def check_dt(self, dt=None) -> float:
        dt = self.dt if dt is None else dt
        if dt is None or not (dt > 0 and math.isfinite(dt)):
            raise ConfigError(f"dt must be positive and finite, got {dt!r}")
        return float(dt)

    def step_count(self) -> int:
        dt = self.check_dt()
        if (self.steps is None) == (self.final_time is None):
            raise ConfigError("give exactly one of steps or final_time")
        if self.steps is not None:
            if int(self.steps) != self.steps or self.steps < 1:
                raise ConfigError(f"steps must be an integer >= 1, got {self.steps!r}")
            return int(self.steps)
        if not (self.final_time > 0 and math.isfinite(self.final_time)):
            raise ConfigError(f"final_time must be positive, got {self.final_time!r}")
        return steps_for(self.final_time, dt)

    def check_method(self) -> str:
        if self.method not in METHOD_IDS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {METHOD_IDS}")
        if self.method != "nsfd" and self.weight is not None:
            raise ConfigError("a weight recipe is only accepted with method nsfd")
        return self.method


def steps_for(final_time: float, dt: float) -> int:
    """``ceil(T / dt)``, ignoring a relative excess of 1e-9 from rounding."""
    ratio = final_time / dt
    return max(1, math.ceil(ratio - 1e-9 * ratio))


def build_weight(recipe: str, problem: Problem, margin: float) -> WeightFunction:
    sys, V = problem.system, problem.lyapunov
    try:
        if recipe == "lyapunov":
            return WeightFunction.from_lyapunov_bound(V, sys, margin)
        if recipe == "positivity":
            return WeightFunction.from_positivity_bound(sys, margin)
        if recipe == "combined":
            return WeightFunction.combined(V, sys, margin)
        if recipe == "constant":
            return WeightFunction.constant(margin)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown weight recipe {recipe!r}; choose from {WEIGHT_IDS}")


def build_scheme(cfg: ExperimentConfig, problem: Problem) -> NsfdScheme:
    try:
        phi = denominator(cfg.phi)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return NsfdScheme(problem.system, build_weight(cfg.weight or "lyapunov", problem, cfg.margin), phi)


def run_method(
    name: str,
    cfg: ExperimentConfig,
    problem: Problem,
    y0: State,
    dt: float,
    steps: int,
    observer=None,
    store: bool = True,
) -> Trajectory:
    """Integrate with one of the four methods; NSFD step errors propagate."""
    if name == "nsfd":
        return integrate(build_scheme(cfg, problem), y0, dt, steps, observer, problem.lyapunov, store)
    return integrate_with(reference_method(name), problem.system, y0, dt, steps, observer, problem.lyapunov, store)


# --- run records -----------------------------------------------------------


def _fmt(x: float | None) -> str:
    return "" if x is None else format(x, ".17g")


@dataclass
class RunRecord:
    """Per-step rows ``(k, t, y_1..y_n, V, dV)``; ``dV`` is ``None`` on the last row."""

    dimension: int
    rows: list[tuple] = field(default_factory=list)

    @property
    def header(self) -> list[str]:
        return ["k", "t", *(f"y{i + 1}" for i in range(self.dimension)), "V", "dV"]

    def add(self, k, t, y, v, dv) -> None:
        self.rows.append((k, t, *y, v, dv))

    def write(self, fh: IO[str]) -> None:
        fh.write(",".join(self.header) + "\n")
        for row in self.rows:
            fh.write(format_row(row) + "\n")


def format_row(row: Sequence) -> str:
    return ",".join([str(row[0])] + [_fmt(x) for x in row[1:]])


def read_run_csv(path: str | Path) -> RunRecord:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n = len(header) - 4
        if n < 1 or header != ["k", "t", *(f"y{i + 1}" for i in range(n)), "V", "dV"]:
            raise ValueError(f"unexpected header {header}")
        rec = RunRecord(n)
        for r in reader:
            rec.rows.append((int(r[0]), *(float(x) for x in r[1:-1]), float(r[-1]) if r[-1] else None))
    return rec


class CsvStreamer:
    """Observer that writes rows to an open file as they are produced."""

    def __init__(self, fh: IO[str], dimension: int, stride: int = 1, keep: RunRecord | None = None):
        self.fh = fh
        self.stride = stride
        self.keep = keep
        fh.write(",".join(RunRecord(dimension).header) + "\n")

    def __call__(self, k, t, y, v, dv):
        if k % self.stride == 0 or dv is None:
            row = (k, t, *y, v, dv)
            self.fh.write(format_row(row) + "\n")
            if self.keep is not None:
                self.keep.rows.append(row)


class VTracker:
    """Observer collecting V statistics without storing the trajectory."""

    def __init__(self):
        self.v0 = None
        self.vmin = math.inf
        self.vmax = -math.inf
        self.first_increase = None
        self.monotone = True
        self._prev = None

    def __call__(self, k, t, y, v, dv):
        if self.v0 is None:
            self.v0 = v
        self.vmin = min(self.vmin, v)
        self.vmax = max(self.vmax, v)
        prev = self._prev
        if prev is not None and prev > 0.0 and not v < prev:
            self.monotone = False
        if prev is not None and v > prev and self.first_increase is None:
            self.first_increase = k - 1
        self._prev = v


class Tee:
    def __init__(self, *observers):
        self.observers = [o for o in observers if o is not None]

    def __call__(self, *args):
        for o in self.observers:
            o(*args)


def _norm(y: Sequence[float]) -> float:
    return max(abs(v) for v in y)


def _state_str(y: Sequence[float]) -> str:
    return "(" + ", ".join(format(v, ".10g") for v in y) + ")"


# --- commands ----------------------------------------------------------------


def cmd_run(cfg: ExperimentConfig, stream: IO[str] = sys.stdout, record: RunRecord | None = None) -> int:
    """Integrate one configuration, stream the CSV and print a summary line.

    ``record``, when given, receives every written row (used for testing).
    """
    try:
        name = cfg.check_method()
        problem = cfg.get_problem()
        y0 = cfg.initial_state(problem)
        dt = cfg.check_dt()
        steps = cfg.step_count()
        if cfg.stride < 1:
            raise ConfigError("stride must be >= 1")
        if name == "nsfd":
            build_scheme(cfg, problem)
    except ConfigError as exc:
        print(f"error: {exc}", file=stream)
        return EXIT_CONFIG

    tracker = VTracker()
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
    fh = open(cfg.out, "w", encoding="utf-8", newline="\n") if cfg.out else None
    try:
        writer = CsvStreamer(fh, problem.system.dimension, cfg.stride, record) if fh else None
        if writer is None and record is not None:
            writer = lambda k, t, y, v, dv: record.add(k, t, y, v, dv)  # noqa: E731
        try:
            traj = run_method(name, cfg, problem, y0, dt, steps, Tee(tracker, writer), store=False)
        except StepError as exc:
            print(f"error: {name} failed at step {exc.step}: {exc.cause}", file=stream)
            return EXIT_NONFINITE if isinstance(exc.cause, NonFiniteError) else EXIT_CONFIG
    finally:
        if fh:
            fh.close()

    print(
        f"method={name} problem={problem.name} dt={dt:g} steps={traj.steps_taken}/{steps} "
        f"V_min={tracker.vmin:.6g} V_max={tracker.vmax:.6g} V_monotone_decreasing={str(tracker.monotone).lower()} "
        f"first_increase={tracker.first_increase} final={_state_str(traj.final)}",
        file=stream,
    )
    if traj.diverged_at is not None:
        print(f"truncated: {traj.message}", file=stream)
        return EXIT_NONFINITE
    return EXIT_OK


@dataclass
class CompareRow:
    method: str
    monotone: bool
    first_increase: int | None
    v_initial: float
    v_final: float
    final_norm: float
    diverged_at: int | None = None
    error: str = ""


def compare(cfg: ExperimentConfig) -> list[CompareRow]:
    problem = cfg.get_problem()
    y0 = cfg.initial_state(problem)
    dt = cfg.check_dt()
    steps = cfg.step_count()
    rows = []
    for name in cfg.methods:
        if name not in METHOD_IDS:
            raise ConfigError(f"unknown method {name!r}")
        tracker = VTracker()
        try:
            traj = run_method(name, cfg, problem, y0, dt, steps, tracker, store=False)
        except StepError as exc:
            rows.append(CompareRow(name, False, tracker.first_increase, tracker.v0, math.nan, math.nan,
                                   exc.step, str(exc.cause)))
            continue
        rows.append(CompareRow(name, tracker.monotone, tracker.first_increase, tracker.v0,
                               problem.lyapunov(traj.final), _norm(traj.final), traj.diverged_at, traj.message))
    return rows


def cmd_compare(cfg: ExperimentConfig, stream: IO[str] = sys.stdout) -> int:
    try:
        rows = compare(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=stream)
        return EXIT_CONFIG
    cols = ["method", "monotone", "first_increase", "V_initial", "V_final", "final_norm", "diverged_at"]
    table = [
        [r.method, str(r.monotone).lower(), "" if r.first_increase is None else str(r.first_increase),
         _fmt(r.v_initial), _fmt(r.v_final), _fmt(r.final_norm),
         "" if r.diverged_at is None else str(r.diverged_at)]
        for r in rows
    ]
    widths = [max(len(c), *(len(t[i]) for t in table)) for i, c in enumerate(cols)]
    print("  ".join(c.ljust(w) for c, w in zip(cols, widths)), file=stream)
    for t in table:
        print("  ".join(v.ljust(w) for v, w in zip(t, widths)), file=stream)
    for r in rows:
        if r.error:
            print(f"{r.method}: {r.error}", file=stream)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(cols) + "\n")
            for t in table:
                fh.write(",".join(t) + "\n")
    return EXIT_OK


@dataclass
class ConvergenceResult:
    method: str
    dts: list[float]
    errors: list[float | str]
    slope: float


def convergence(cfg: ExperimentConfig) -> list[ConvergenceResult]:
    problem = cfg.get_problem()
    y0 = cfg.initial_state(problem)
    T = cfg.final_time if cfg.final_time is not None else 10.0
    if not T > 0:
        raise ConfigError("final_time must be positive")
    dts = [cfg.check_dt(d) for d in (cfg.dts or [])]
    if len(dts) < 2:
        raise ConfigError("convergence needs at least two step sizes")

    def whole(x):
        r = round(x)
        return r >= 1 and abs(x - r) <= 1e-9 * r

    for d in dts:
        if not whole(T / d):
            raise ConfigError(f"step {d:g} does not divide final time {T:g}")
    if cfg.reference == "exact":
        if problem.exact is None:
            raise ConfigError(f"problem {problem.name} has no exact solution")
        ref = problem.exact(y0, T)
        ref_dt = None
    elif cfg.reference == "rk4":
        ref_dt = cfg.check_dt(cfg.reference_dt)
        for d in dts:
            if not whole(d / ref_dt):
                raise ConfigError(f"step {d:g} is not an integer multiple of the reference step {ref_dt:g}")
        ref = integrate_with(reference_method("rk4"), problem.system, y0, ref_dt,
                             round(T / ref_dt), store=False).final
    else:
        raise ConfigError(f"unknown reference {cfg.reference!r}; use rk4 or exact")

    results = []
    for name in cfg.methods:
        if name not in METHOD_IDS:
            raise ConfigError(f"unknown method {name!r}")
        errors, xs, ys = [], [], []
        for d in dts:
            if name == "rk4" and ref_dt is not None and math.isclose(d, ref_dt):
                errors.append("reference")
                continue
            traj = run_method(name, cfg, problem, y0, d, round(T / d), store=False)
            if traj.diverged_at is not None:
                errors.append(math.inf)
                continue
            err = max(abs(a - b) for a, b in zip(traj.final, ref))
            errors.append(err)
            if err > 0:
                xs.append(math.log(d))
                ys.append(math.log(err))
        slope = float(np.polyfit(xs, ys, 1)[0]) if len(xs) >= 2 else math.nan
        results.append(ConvergenceResult(name, dts, errors, slope))
    return results


def cmd_convergence(cfg: ExperimentConfig, stream: IO[str] = sys.stdout) -> int:
    try:
        results = convergence(cfg)
    except (ConfigError, StepError) as exc:
        print(f"error: {exc}", file=stream)
        return EXIT_CONFIG
    header = ["method", *(f"err(dt={d:g})" for d in results[0].dts), "order"]
    lines = [
        [r.method, *(e if isinstance(e, str) else format(e, ".6e") for e in r.errors), format(r.slope, ".4f")]
        for r in results
    ]
    print(",".join(header), file=stream)
    for ln in lines:
        print(",".join(ln), file=stream)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            for ln in [header, *lines]:
                fh.write(",".join(ln) + "\n")
    return EXIT_OK


# --- property suite ----------------------------------------------------------


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)
    # predicted decrease smaller than the rounding of the stored iterate
    unresolved: list[str] = field(default_factory=list)
    skipped: str = ""

    @property
    def passed(self) -> bool:
        return not self.failures


def sample_states(rng: np.random.Generator, center: State, count: int, lo: float = 1e-6, hi: float = 10.0,
                  orthant: bool = False):
    """Points at max-norm distance uniform in ``[lo, hi]`` from ``center``.

    With ``orthant=True`` the offsets are nonnegative.
    """
    n = len(center)
    radii = rng.uniform(lo, hi, size=count)
    dirs = rng.uniform(0.0 if orthant else -1.0, 1.0, size=(count, n))
    dirs /= np.abs(dirs).max(axis=1, keepdims=True)
    pts = np.asarray(center) + dirs * radii[:, None]
    return [tuple(float(v) for v in p) for p in pts]


def log_uniform(rng: np.random.Generator, lo: float, hi: float, count: int) -> list[float]:
    return [float(v) for v in 10.0 ** rng.uniform(math.log10(lo), math.log10(hi), size=count)]


def rounding_noise(V: QuadraticLyapunov, y: State) -> float:
    """Change in ``V`` that rounding ``y`` to double precision can cause."""
    return sys.float_info.epsilon * math.fsum(a * abs(v - c) * abs(v) for a, v, c in zip(V.alphas, y, V.center))


def lyapunov_suites(scheme: NsfdScheme, V: QuadraticLyapunov, samples: int, seed: int,
                    dt_range=(1e-6, 1e3), orthant: bool = False) -> tuple[SuiteResult, SuiteResult]:
    """Random ``(y, dt)`` checks of ``dV < 0`` and of the closed-form identity."""
    rng = np.random.default_rng(seed)
    states = sample_states(rng, scheme.system.equilibrium, samples, orthant=orthant)
    dts = log_uniform(rng, *dt_range, samples)
    decrease = SuiteResult("lyapunov_decrease")
    identity = SuiteResult("closed_form_identity")
    for y, dt in zip(states, dts):
        decrease.checked += 1
        identity.checked += 1
        try:
            direct = delta_v_direct(V, scheme, y, dt)
            closed = delta_v_closed_form(V, scheme, y, dt)
        except (ValueError, ArithmeticError) as exc:
            decrease.failures.append(f"y={_state_str(y)} dt={dt!r}: {exc}")
            continue
        if not direct < 0:
            if closed < 0 and -closed < rounding_noise(V, nsfd_step(scheme, y, dt)):
                decrease.unresolved.append(f"y={_state_str(y)} dt={dt!r}: dV={direct!r} predicted={closed!r}")
            else:
                decrease.failures.append(f"y={_state_str(y)} dt={dt!r}: dV={direct!r}")
        if abs(closed - direct) > 1e-10 * max(1.0, abs(direct)):
            identity.failures.append(f"y={_state_str(y)} dt={dt!r}: direct={direct!r} closed={closed!r}")
    return decrease, identity


def positivity_suite(scheme: NsfdScheme, samples: int, seed: int, steps: int = 200,
                     box: float = 10.0, dt_range=(1e-3, 1e2), tol: float = 1e-14) -> SuiteResult:
    result = SuiteResult("positivity_invariance")
    sys_ = scheme.system
    witnesses = check_quasi_positivity(sys_, 100, [box] * sys_.dimension, seed)
    if witnesses:
        w = witnesses[0]
        result.skipped = (f"system is not quasi-positive (f_{w.face + 1}{_state_str(w.point)} = {w.value:.3g})")
        return result
    rng = np.random.default_rng(seed + 1)
    starts = rng.uniform(0.0, box, size=(samples, sys_.dimension))
    dts = log_uniform(rng, *dt_range, samples)
    for y0, dt in zip(starts, dts):
        result.checked += 1
        y0 = tuple(float(v) for v in y0)
        try:
            traj = integrate(scheme, y0, dt, steps)
        except StepError as exc:
            result.failures.append(f"y0={_state_str(y0)} dt={dt!r}: step {exc.step}: {exc.cause}")
            continue
        for k, y in enumerate(traj):
            if min(y) < -tol:
                result.failures.append(f"y0={_state_str(y0)} dt={dt!r}: y^{k}={_state_str(y)}")
                break
    return result


def property_suite(cfg: ExperimentConfig) -> list[SuiteResult]:
    if int(cfg.samples) != cfg.samples or cfg.samples < 1:
        raise ConfigError(f"samples must be an integer >= 1, got {cfg.samples!r}")
    if cfg.method != "nsfd":
        raise ConfigError("the property suite checks the nsfd method")
    problem = cfg.get_problem()
    scheme = build_scheme(cfg, problem)
    # positivity weights are only defined on the nonnegative orthant
    orthant = cfg.weight in ("positivity", "combined")
    decrease, identity = lyapunov_suites(scheme, problem.lyapunov, cfg.samples, cfg.seed, orthant=orthant)
    return [decrease, identity, positivity_suite(scheme, cfg.samples, cfg.seed)]


def cmd_property_suite(cfg: ExperimentConfig, stream: IO[str] = sys.stdout) -> int:
    try:
        results = property_suite(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=stream)
        return EXIT_CONFIG
    for r in results:
        if r.skipped:
            print(f"SKIP {r.name}: {r.skipped}", file=stream)
            continue
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: {r.checked - len(r.failures)}/{r.checked} ok", file=stream)
        if r.unresolved:
            print(f"  {len(r.unresolved)} sample(s) with predicted decrease below double-precision "
                  f"resolution of the iterate, e.g. {r.unresolved[0]}", file=stream)
        for msg in r.failures[:5]:
            print(f"  counterexample {msg}", file=stream)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION
