import numpy as np
import pytest

from hybridreach import BallSet, BoxSet, VehicleModel


@pytest.fixture
def vehicle():
    return VehicleModel(0.1, 0.15, 0.07, 2.0, BoxSet([0, 0], [1, 1]), BallSet([0.3, 0.8], 0.05))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = []


@pytest.fixture
def record_criterion():
    """Record ``(label, passed, detail)`` for the end-of-run acceptance summary."""

    def record(label, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} {label}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
