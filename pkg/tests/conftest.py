import math

import numpy as np
import pytest
from scipy.integrate import quad

from shapeservo.config import load_preset
from shapeservo.simulation import run_scenario


def erf_quadrature(x: float) -> float:
    """Independent oracle: integrate the Gaussian density directly."""
    val, _ = quad(lambda t: math.exp(-t * t), 0.0, x, epsabs=1e-14, epsrel=1e-13, limit=200)
    return 2.0 / math.sqrt(math.pi) * val


@pytest.fixture(scope="session")
def regulation_result():
    return run_scenario(load_preset("regulation-linear"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def tracking_result():
    return run_scenario(load_preset("tracking-linear"))


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion and assert it."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    def record(criterion: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
