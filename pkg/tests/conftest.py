"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from __future__ import annotations

import pytest

_TITLES: dict[int, str] = {}
_OUTCOMES: dict[int, list[tuple[str, str]]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _TITLES[number] = title
            _OUTCOMES.setdefault(number, [])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _OUTCOMES[mark.args[0]].append((item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        results = _OUTCOMES[number]
        failed = [name for name, outcome in results if outcome != "passed"]
        if not results:
            status, detail = "NOT RUN", ""
        elif failed:
            status, detail = "FAIL", f" (failing: {', '.join(failed)})"
        else:
            status, detail = "PASS", f" ({len(results)} checks)"
        terminalreporter.write_line(f"CRITERION {number}: {status} {_TITLES[number]}{detail}")
