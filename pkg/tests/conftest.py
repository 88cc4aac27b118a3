import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lpvmax.model import random_fir_model, random_stable_model

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def bench_model():
    """Random stable model with the benchmark dimensions (n_x = n_u = n_y = n_p = 2)."""
    return random_stable_model((2, 2, 2, 2), seed=0)


@pytest.fixture
def fir_model():
    return random_fir_model((2, 2, 2, 2), seed=0)


def white_signals(rng, n, n_u, n_p):
    return rng.standard_normal((n, n_u)), rng.uniform(-1, 1, (n, n_p))


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    lines = getattr(module, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
