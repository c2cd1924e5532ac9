import pytest

from subconvex.forms import builtin_delta

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def delta20k():
    return builtin_delta(20000)


@pytest.fixture(scope="session")
def delta_afe():
    # Enough for the approximate functional equation with conductor up to 20.
    return builtin_delta(350000)


@pytest.fixture
def criterion():
    """Record one acceptance line; all lines are repeated in the terminal summary."""
    def record(number: int, name: str, ok: bool, detail: str = ""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
