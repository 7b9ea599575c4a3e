import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> (title, passed?) filled in by test_acceptance
ACCEPTANCE: dict[int, tuple[str, bool]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when != "call" and not (report.failed or report.skipped):
        return
    number, title = marker.args
    if report.skipped:
        ACCEPTANCE[number] = (title, None)
    else:
        prev = ACCEPTANCE.get(number, (title, True))[1]
        ACCEPTANCE[number] = (title, bool(prev is not False and report.passed))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config.addinivalue_line("markers", "slow: long-running full-size check")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[number]
        verdict = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        terminalreporter.write_line(f"[{verdict}] criterion {number:2d}: {title}")
