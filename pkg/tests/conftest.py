import pytest

from mirrorgmt.fixtures import cp2_tables, octic_tables

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def octic():
    return octic_tables()


@pytest.fixture
def cp2():
    return cp2_tables()


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
