import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("vnls", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("vnls")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_samples(rng, grid, scale=1.0):
    return scale * (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
