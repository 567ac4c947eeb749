import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

MARGIN = 0.1
ANGLE_MAX = math.pi / 2 - MARGIN

interior_angle = st.floats(-ANGLE_MAX, ANGLE_MAX, allow_nan=False)
any_angle = st.floats(-math.pi, math.pi, allow_nan=False)
moderate = st.floats(-2.0, 2.0, allow_nan=False)


def random_interior_states(rng: np.random.Generator, n: int, margin: float = MARGIN) -> np.ndarray:
    s = rng.uniform(-1.0, 1.0, size=(n, 12))
    s[:, 6:8] = rng.uniform(-math.pi / 2 + margin, math.pi / 2 - margin, size=(n, 2))
    s[:, 8] = rng.uniform(-math.pi, math.pi, size=n)
    return s


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# Acceptance results are collected here and echoed in the terminal summary.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
