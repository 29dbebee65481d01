"""Collects one pass/fail line per acceptance criterion for the terminal summary."""

import pytest

_RESULTS = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when != "call" and not report.failed:
        return
    if report.failed or item.nodeid not in _RESULTS:
        detail = dict(report.user_properties).get("detail", "")
        _RESULTS[item.nodeid] = (str(marker.args[0]), report.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (label, passed, detail) in sorted(_RESULTS.items(), key=lambda kv: _key(kv[1][0])):
        name = nodeid.split("::")[-1]
        line = f"criterion {label}: {'PASS' if passed else 'FAIL'}  {name}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)


def _key(label):
    head = label.split(".")[0].rstrip("abcdefghijklmnopqrstuvwxyz")
    return (int(head) if head.isdigit() else 99, label)
