"""Acceptance reporting: tests marked ``acceptance("ACn ...")`` roll up into
one PASS/FAIL/SKIP line per criterion in the terminal summary."""

from collections import OrderedDict

import pytest

_criteria = OrderedDict()


def _criterion(item):
    marker = item.get_closest_marker("acceptance")
    return marker.args[0] if marker and marker.args else None


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    name = _criterion(item)
    if name is None:
        return
    states = _criteria.setdefault(name, [])
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        states.append(report.outcome)


def _verdict(states):
    if any(s == "failed" for s in states):
        return "FAIL"
    if states and all(s == "skipped" for s in states):
        return "SKIP"
    return "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    width = max(len(name) for name in _criteria)
    for name in sorted(_criteria, key=lambda n: (len(n.split()[0]), n)):
        states = _criteria[name]
        terminalreporter.write_line(f"{name.ljust(width)}  {_verdict(states)}  ({len(states)} checks)")
