import pytest

ACCEPTANCE_LINES = {}


@pytest.fixture
def verdict(request):
    """Record one summary line per acceptance criterion."""
    key = request.node.name

    def record(number, ok, detail):
        ACCEPTANCE_LINES[key] = (number, f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        print(ACCEPTANCE_LINES[key][1])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES.values()):
        terminalreporter.write_line(line)
