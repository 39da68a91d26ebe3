import pytest

from floorlayout.instance import parse_instance, random_instance, shipped_instance

# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def toy2():
    return shipped_instance("toy2")


@pytest.fixture
def toy3():
    return shipped_instance("toy3")


@pytest.fixture
def toy4():
    return shipped_instance("toy4")


@pytest.fixture
def rand3():
    return random_instance(3, 0)


@pytest.fixture
def zero_cost_pair():
    return parse_instance("floor 10 10\nbox 1 4 4\nbox 2 4 4\n", "zero2")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
