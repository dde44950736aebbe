import numpy as np
import pytest

from fmmd.mesh import uniform_mesh

ACCEPTANCE = {}


@pytest.fixture
def mesh50():
    return uniform_mesh(50, (0.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance():
    """Record ``(criterion, passed, detail)`` for the end-of-run summary."""

    def record(number, passed, detail):
        ACCEPTANCE[number] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
