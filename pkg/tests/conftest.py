import os

import numpy as np
import pytest
from hypothesis import settings

from cheaptalk import build_game

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def baseline():
    return build_game()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def n_workers() -> int:
    return max(1, min(4, os.cpu_count() or 1))


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
