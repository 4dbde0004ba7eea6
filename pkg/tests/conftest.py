import pytest

_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line; the lines are repeated in the terminal summary."""

    def record(number, ok, detail):
        line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} {detail}"
        print(line)
        _LINES.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
