import warnings

import pytest

from deon.fixtures import SPECS, load_fixture

_acceptance = []


@pytest.fixture(scope="session")
def fixtures():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return {name: load_fixture(name) for name in SPECS}


@pytest.fixture
def ng(fixtures):
    return fixtures["SPEC_NG"]


@pytest.fixture
def rs(fixtures):
    return fixtures["SPEC_RS"]


@pytest.fixture
def guess(fixtures):
    return fixtures["SPEC_GUESS"]


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for name, args in getattr(report, "criterion", ()):
        _acceptance.append((args, report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        report.criterion = [("criterion", marker.args)]


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), outcome in sorted(_acceptance):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")
