"""Shared pytest setup: one pass/fail line per acceptance criterion.

Acceptance tests carry ``@pytest.mark.acceptance(number, title)`` and may
attach a short ``measured`` string through ``record_property``.
"""

import pytest

_results: dict[int, tuple[str, str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or not marker.args:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        number, title = marker.args
        measured = dict(item.user_properties).get("measured", "")
        _results[number] = ("PASS" if report.passed else "FAIL", title, measured)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        status, title, measured = _results[number]
        line = f"criterion {number:>2}: {status}  {title}"
        if measured:
            line += f"  [{measured}]"
        terminalreporter.write_line(line)
    passed = sum(status == "PASS" for status, _, _ in _results.values())
    terminalreporter.write_line(f"{passed}/{len(_results)} criteria passed")
