"""Shared fixtures plus the acceptance-criteria summary.

Acceptance tests are named ``test_criterion_NN_...``; after the run,
one PASS/FAIL line is printed per criterion, aggregating every test
that belongs to it.
"""

import re
from pathlib import Path

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)")
_results: dict[int, list[bool]] = {}

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"


@pytest.fixture
def programs() -> Path:
    return PROGRAMS


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call":
        _results.setdefault(n, []).append(report.passed)
    elif report.failed:  # setup/teardown error counts against the criterion
        _results.setdefault(n, []).append(False)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for n in sorted(_results):
        verdict = "PASS" if all(_results[n]) else "FAIL"
        terminalreporter.write_line(f"CRITERION {n}: {verdict}")
