import numpy as np
import pytest
from hypothesis import settings

from collapse_ns import build_profile

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def cosine_circle():
    return build_profile({"base": "circle", "area": "cosine", "mean": 1.5, "amplitude": 0.5})


@pytest.fixture
def affine_interval():
    return build_profile({"base": "interval", "area": "affine", "a0": 1.0, "a1": 0.5})


@pytest.fixture
def constant_circle():
    return build_profile({"base": "circle", "area": "constant", "value": 1.0})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: long end-to-end acceptance runs")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
