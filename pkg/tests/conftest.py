"""Prints one pass/fail line per acceptance criterion after the run."""
import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(number, title): acceptance criterion gate")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.skipped):
        return
    marker = _RESULTS.pop(("pending", report.nodeid), None)
    if marker is None:
        return
    number, title = marker
    if report.skipped:
        outcome = "SKIP"
    else:
        outcome = "PASS" if report.passed else "FAIL"
    _RESULTS[number] = (outcome, title)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_setup(item):
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        _RESULTS[("pending", item.nodeid)] = (marker.args[0], marker.args[1])
    yield


def pytest_terminal_summary(terminalreporter):
    numbered = {k: v for k, v in _RESULTS.items() if isinstance(k, int)}
    if not numbered:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(numbered):
        outcome, title = numbered[number]
        terminalreporter.write_line(f"criterion {number}: {outcome} — {title}")
