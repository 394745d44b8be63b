import numpy as np
import pytest

from cicc.prob import Channel, Dist, InputDesign


@pytest.fixture
def design():
    return InputDesign(
        Dist([0.6, 0.4]),
        Channel([[0.7, 0.3], [0.2, 0.8]]),
        Channel([[[0.9, 0.1], [0.4, 0.6]], [[0.25, 0.75], [0.5, 0.5]]]),
        Channel([[0.8, 0.2], [0.3, 0.7]]),
    )


@pytest.fixture
def py():
    return Channel([[[0.9, 0.1], [0.7, 0.3]], [[0.2, 0.8], [0.15, 0.85]]])


@pytest.fixture
def pz():
    return Channel([[[0.6, 0.4], [0.55, 0.45]], [[0.35, 0.65], [0.4, 0.6]]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one summary line per acceptance criterion, printed after the run
_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when not in ("setup", "call"):
        return
    number, text = mark.args
    failed = call.excinfo is not None
    if call.when == "call" or failed:
        _criteria[number] = (text, "FAIL" if failed else "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        text, verdict = _criteria[number]
        terminalreporter.write_line(f"criterion {number}: {verdict}  {text}")
