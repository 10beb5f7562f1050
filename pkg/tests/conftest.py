"""Shared fixtures: criterion bookkeeping for the acceptance suite."""

from contextlib import contextmanager

import pytest

CRITERION_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERION_RESULTS:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in CRITERION_RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion."""

    @contextmanager
    def check(number, label):
        try:
            yield
        except BaseException:
            CRITERION_RESULTS.append(f"FAIL  criterion {number}: {label}")
            raise
        CRITERION_RESULTS.append(f"PASS  criterion {number}: {label}")

    return check
