import contextlib

import pytest

ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record the outcome of an acceptance criterion for the end-of-run summary."""

    @contextlib.contextmanager
    def record(number, title):
        try:
            yield
        except BaseException as exc:
            ACCEPTANCE[number] = (title, f"FAIL ({type(exc).__name__}: {exc})")
            raise
        ACCEPTANCE[number] = (title, "PASS")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, outcome = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {outcome} - {title}")
