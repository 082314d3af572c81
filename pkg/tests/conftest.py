import os
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from srsa.color import MunsellChart, approximate_chart  # noqa: E402


@pytest.fixture(scope="session")
def chart():
    return approximate_chart()


@pytest.fixture(scope="session")
def toy_chart(chart):
    # a 2 x 4 block of neighbouring chips, so the Gaussian meanings overlap
    ids = [c.id for c in chart.chips if c.grid_row in "EF" and 1 <= c.grid_col <= 4]
    return chart.subset(ids)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_game_arrays(rng, n, k, zero_frac=0.0):
    mf = rng.random((n, k))
    if zero_frac:
        mf[rng.random((n, k)) < zero_frac] = 0.0
    mf[np.arange(n), rng.integers(0, k, n)] = rng.uniform(0.1, 1.0, n)
    return mf


def line_chart(positions) -> MunsellChart:
    """Chips on the L* axis at the given coordinates."""
    labs = np.array([[p, 0.0, 0.0] for p in positions], dtype=float)
    return MunsellChart.from_labs(labs)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for name, mod in list(sys.modules.items()):
        if name.endswith("test_acceptance"):
            lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
