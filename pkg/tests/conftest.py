import math

import numpy as np
import pytest

from shiftpress.symbolic import Geometric, ShiftSystem, WeightedProduct
from shiftpress.targets import Full, Subshift

PHI = (1 + math.sqrt(5)) / 2
LOG2 = math.log(2)

GOLDEN = [[1, 1], [1, 0]]


def geo(theta=2.0, k=2, transition=None):
    return ShiftSystem(k, Geometric(theta), transition)


def weighted(thetas=(2, 4), harmonic=False):
    return ShiftSystem(len(thetas), WeightedProduct(tuple(thetas), harmonic))


@pytest.fixture
def geo2():
    return geo(2.0)


@pytest.fixture
def w24():
    return weighted((2, 4))


@pytest.fixture
def w24h():
    return weighted((2, 4), harmonic=True)


@pytest.fixture
def golden():
    return geo(2.0, transition=GOLDEN)


@pytest.fixture
def no11():
    return Subshift(("11",))


@pytest.fixture
def full():
    return Full()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
