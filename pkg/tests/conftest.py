import numpy as np
import pytest

from nsfd import NsfdScheme, WeightFunction, make_problem


@pytest.fixture(scope="session")
def osc():
    """The cubic oscillator with (A, B, C, D) = (0.16, 1, 1, 0.1)."""
    return make_problem("ghaffari")


@pytest.fixture(scope="session")
def osc_scheme(osc):
    return NsfdScheme(osc.system, WeightFunction.from_lyapunov_bound(osc.lyapunov, osc.system, 0.001))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for the acceptance summary."""
    lines = request.config._acceptance_lines

    def record(criterion, ok, detail):
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
