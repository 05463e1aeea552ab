import pytest

_LINES: list[str] = []


@pytest.fixture
def verdict_line():
    """Record one summary line per acceptance criterion; printed after the run."""

    def record(label: str, ok: bool, detail: str = "") -> None:
        _LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else ""))

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
