import numpy as np
import pytest
from hypothesis import settings

from dpcp.arrangement import make_rng

settings.register_profile("dpcp", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("dpcp")

# acceptance lines collected by test_acceptance.py, printed once at the end
ACCEPTANCE_LINES = {}


@pytest.fixture
def rng():
    return make_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int("".join(ch for ch in k if ch.isdigit())), k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
