import time
from contextlib import contextmanager

import numpy as np
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def criterion():
    """Context manager recording one PASS/FAIL line for an acceptance criterion."""

    @contextmanager
    def check(label):
        t0 = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            msg = " ".join(str(exc).split())[:160]
            ACCEPTANCE_LINES.append(f"FAIL  {label}: {msg}")
            print(ACCEPTANCE_LINES[-1])
            raise
        ACCEPTANCE_LINES.append(f"PASS  {label} ({time.perf_counter() - t0:.2f} s)")
        print(ACCEPTANCE_LINES[-1])

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
