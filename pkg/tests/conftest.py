"""Session bookkeeping for the acceptance report.

Acceptance tests run after every other test so that criterion 10 (the
invariant suite) can be read off the outcomes of this same session.  Each
criterion records one line; the lines are shown in the terminal summary.
"""

import pytest

ACCEPTANCE_MODULE = "test_acceptance.py"

_report = {}
_suite = {"passed": 0, "failed": []}


def pytest_collection_modifyitems(items):
    items.sort(key=lambda item: item.nodeid.split("::")[0].endswith(ACCEPTANCE_MODULE))


def pytest_runtest_logreport(report):
    if ACCEPTANCE_MODULE in report.nodeid:
        return
    if report.failed:
        _suite["failed"].append(report.nodeid)
    elif report.when == "call" and report.passed:
        _suite["passed"] += 1


@pytest.fixture
def suite_outcome():
    return _suite


@pytest.fixture
def record():
    def _record(number, title, passed, detail):
        _report[number] = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _report:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_report):
        terminalreporter.write_line(_report[number])
