import numpy as np
import pytest

from mixedrobust.expr import parse
from mixedrobust.param import AxisEllipsoid, DistributionSpec, ParamBox, Uniform
from mixedrobust.robust import CoefficientMap

_ACCEPTANCE_KEY = pytest.StashKey[list]()

# stable iff |q1 - d1| < 0.5
DISTANCE_MAP = ["1", "2 - abs(q1 - d1)", "2", "3"]
ELLIPSE_MAP = ["0.7 + q1", "5.5 + q2 + d1", "-1 + d2 - 15*d1", "-15*d2"]


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(lines):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def record(request):
    """Log one acceptance line, then assert it."""
    store = request.config.stash[_ACCEPTANCE_KEY]

    def _record(number: int, ok: bool, detail: str):
        store.append((number, bool(ok), detail))
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return _record


@pytest.fixture
def distance_map():
    return CoefficientMap.from_strings(DISTANCE_MAP, 1, 1)


@pytest.fixture
def ellipse_map():
    return CoefficientMap.from_strings(ELLIPSE_MAP, 2, 2)


@pytest.fixture
def ellipse_set():
    return AxisEllipsoid([100, 25], [0, 0], 9)


@pytest.fixture
def ellipse_law():
    return DistributionSpec((Uniform(-4, -2), Uniform(-7, -2)))


@pytest.fixture
def moving_box():
    return ParamBox((parse("1 - d1/3", 0, 1),), (parse("2 - d1", 0, 1),))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
