import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("freeclt", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("freeclt")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def upper_half_plane(rng, k=100, lo=1e-3, hi=4.0, span=5.0):
    """Fixed-seed points in the upper half-plane."""
    return rng.uniform(-span, span, k) + 1j * rng.uniform(lo, hi, k)


_ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion; printed in the summary."""

    def record(number: int, passed: bool, detail: str):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(_ACCEPTANCE_LINES[k])
