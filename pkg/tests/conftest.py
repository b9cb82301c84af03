import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import criteria_log  # noqa: E402
from tnrenorm import InitParams  # noqa: E402

DATA = Path(__file__).parent / "data"


@pytest.fixture
def ones():
    return InitParams(mean=1.0, std=0.0, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if criteria_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in criteria_log.LINES:
            terminalreporter.write_line(line)
