import pytest

_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Call as criterion(name, ok, **measured); records a line and asserts ok."""

    def record(name, ok, **measured):
        vals = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in measured.items())
        _CRITERIA.append(f"{'PASS' if ok else 'FAIL'}  {name}: {vals}")
        assert ok, f"{name} failed: {vals}"

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
