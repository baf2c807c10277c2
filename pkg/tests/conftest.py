import pytest

_REPORT: list[str] = []


@pytest.fixture
def report():
    """Record a one-line PASS/FAIL verdict for the acceptance summary."""

    def record(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        _REPORT.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
