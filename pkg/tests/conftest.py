import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from powertrend.market_data import SyntheticSpec, generate  # noqa: E402

ACCEPTANCE_LINES = []


def random_walk(seed, bars=200, vol=0.02, level=100.0, drift=0.0):
    return generate(SyntheticSpec("random-walk", bars, level=level, noise=vol, seed=seed,
                                  slope=drift, symbol=f"RW{seed:03d}"))


@pytest.fixture
def walks():
    return [random_walk(s) for s in range(10)]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
