import os

import pytest
from hypothesis import HealthCheck, settings

from lasernoise.model import DeviceParams

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def toy():
    """Small device whose master equation is cheap: beta=0.5, N_T=2, kappa*tau=2, j=6."""
    return DeviceParams(beta=0.5, tau=2.0, n_cap_t=2.0, kappa=1.0, pump=6.0, sigma=1.0)


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
