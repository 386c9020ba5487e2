import numpy as np
import pytest

from ncvpath import KINDS, PenaltySpec


def spec_for(kind, lam=1.0):
    """Representative parameters for each kind."""
    tau = 3.7 if kind == "scad" else 3.0
    gamma = 0.5 if kind in ("classo", "sridge") else 0.0
    return PenaltySpec(kind, lam, tau, min(gamma, lam) if kind == "classo" else gamma)


@pytest.fixture(params=KINDS)
def kind(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20240611))


# PASS/FAIL lines from the acceptance suite, repeated in the terminal summary
ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split(".")[0].split()[-1])):
            terminalreporter.write_line(line)
