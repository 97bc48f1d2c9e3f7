"""Shared test infrastructure: the acceptance-criteria report.

Tests that back an acceptance criterion record a one-line verdict through
the `acceptance` fixture; the collected lines are printed as a terminal
section after the run so the criteria can be audited at a glance.
"""

import pytest

_LINES: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    """Return a recorder: record(criterion, passed, detail)."""

    def record(criterion: int, passed: bool, detail: str) -> None:
        _LINES[criterion] = (bool(passed), str(detail))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _LINES:
        return
    # a criterion whose test died before recording must still show up red;
    # the gate is fixed at ten criteria
    for n in range(1, max(10, max(_LINES)) + 1):
        _LINES.setdefault(n, (False, "no verdict recorded"))
    terminalreporter.section("acceptance criteria")
    for n in sorted(_LINES):
        passed, detail = _LINES[n]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict} - {detail}")
