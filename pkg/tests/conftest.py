import pytest

_LINES = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: call with (passed, detail) before asserting."""
    name = request.node.name

    def record(passed, detail=""):
        _LINES.append(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
