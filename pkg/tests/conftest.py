import pytest

_REPORT = []


@pytest.fixture
def report():
    """Record one pass/fail line for the terminal summary."""
    def add(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else "")
        _REPORT.append(line)
        print(line)
        return ok
    return add


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
