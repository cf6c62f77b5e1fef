import numpy as np
import pytest

from arraygain.geometry import ArrayGeometry, wavelength_from_frequency

_acceptance = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def geom32():
    return ArrayGeometry(4, 8, 0.071, wavelength_from_frequency(2.6e9))


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    info = getattr(report, "acceptance", None)
    if info is None:
        return
    _acceptance.setdefault(info, []).append(report.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        outcome.get_result().acceptance = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), results in sorted(_acceptance.items()):
        status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} ({len(results)} check(s))")
