"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import pytest

_TITLES = {}
_OUTCOMES = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    _TITLES[number] = title
    if rep.when == "call" or rep.failed:
        _OUTCOMES.setdefault(number, []).append(rep.passed and rep.when == "call")


def pytest_terminal_summary(terminalreporter):
    if not _TITLES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_TITLES):
        results = _OUTCOMES.get(number, [False])
        ok = bool(results) and all(results)
        terminalreporter.write_line(
            f"{'PASS' if ok else 'FAIL'} criterion {number}: {_TITLES[number]} "
            f"({sum(results)}/{len(results)} checks)")
