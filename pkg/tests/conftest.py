import pytest

_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line: report(k, passed, detail)."""

    def record(k, passed, detail):
        line = f"criterion {k:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _LINES.append((k, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)
