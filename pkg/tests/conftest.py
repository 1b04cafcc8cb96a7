import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kswave.model import ConstantChi, ModelParams

settings.register_profile("kswave", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("kswave")


@pytest.fixture
def kpp():
    """mu = beta = 1, chi = 0, D = 0."""
    return ModelParams(1.0, 1.0, 0.0, ConstantChi(0.0))


@pytest.fixture
def chem4d():
    """mu = 1, beta = 4, D = 1, chi = mu: chemical term sets the closed-form speed."""
    return ModelParams(1.0, 4.0, 1.0, ConstantChi(1.0))


def random_params(rng, d_zero_prob=0.5):
    mu = float(rng.uniform(0.25, 4.0))
    beta = float(rng.uniform(0.5, 4.0))
    diff = 0.0 if rng.random() < d_zero_prob else float(rng.uniform(0.1, 2.0))
    chi = float(rng.uniform(0.0, mu))
    return ModelParams(mu, beta, diff, ConstantChi(chi))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
