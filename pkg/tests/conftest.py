"""Collects acceptance-criterion outcomes and prints one line per criterion at the end of the run."""

import pytest

_OUTCOMES: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (report.when != "call" and report.passed):
        return
    number, title = mark.args
    prev = _OUTCOMES.get(number, ("", "PASS"))[1]
    status = "FAIL" if report.failed else "SKIP" if report.skipped else "PASS"
    if prev != "PASS":
        status = prev if prev == "FAIL" or status == "PASS" else status
    _OUTCOMES[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        title, status = _OUTCOMES[number]
        terminalreporter.write_line(f"{status}  {number:2d}. {title}")
    passed = sum(s == "PASS" for _, s in _OUTCOMES.values())
    terminalreporter.write_line(f"{passed}/{len(_OUTCOMES)} criteria passed")
