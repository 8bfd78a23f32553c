import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_acceptance: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    failed = report.failed or (report.when == "call" and report.outcome != "passed")
    if report.when == "call" or failed:
        prev = _acceptance.get(number, (title, "PASS"))[1]
        status = "FAIL" if failed or prev == "FAIL" else "PASS"
        _acceptance[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        title, status = _acceptance[number]
        terminalreporter.write_line(f"criterion {number} [{status}] {title}")
