import numpy as np
import pytest

from dnlslab.spectral import random_state

_ACCEPTANCE_LINES = []


def record_acceptance(number, name, passed, detail=""):
    """Collect and print one pass/fail line per acceptance criterion."""
    line = f"acceptance criterion {number} ({name}): {'PASS' if passed else 'FAIL'}"
    if detail:
        line += f" -- {detail}"
    _ACCEPTANCE_LINES.append(line)
    print("\n" + line, flush=True)
    return passed


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


@pytest.fixture
def small_state(rng):
    return random_state(6, rng, target_norm=0.3)
