import pytest

_LINES = {}


@pytest.fixture
def acceptance():
    """Record the outcome line of one acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> None:
        _LINES[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(_LINES[number])

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_LINES):
        terminalreporter.write_line(_LINES[n])
