"""Collects acceptance-test outcomes and prints one line per criterion."""

import re

_PATTERN = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")

_ORDER = {"pass": 0, "skip": 1, "FAIL": 2}

_results: dict[int, str] = {}
_titles: dict[int, str] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        match = _PATTERN.search(item.nodeid)
        if match:
            doc = (item.function.__doc__ or "").strip()
            _titles[int(match.group(1))] = doc.splitlines()[0] if doc else item.name


def pytest_runtest_logreport(report):
    match = _PATTERN.search(report.nodeid)
    if not match:
        return
    number = int(match.group(1))
    if report.failed:
        outcome = "FAIL"
    elif report.skipped:
        outcome = "skip"
    elif report.when == "call":
        outcome = "pass"
    else:
        return
    previous = _results.get(number)
    if previous is None or _ORDER[outcome] > _ORDER[previous]:
        _results[number] = outcome


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_results):
        title = _titles.get(number, "")
        line = f"criterion {number:2d}: {title} ".ljust(72, ".")
        terminalreporter.write_line(f"{line} {_results[number]}")
