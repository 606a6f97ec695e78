import pytest

from mopath.graph import MultiGraph

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def diamond():
    """s=0, a=1, b=2, g=3: three s->g routes costing (2,6), (6,2), (5,5)."""
    return MultiGraph.from_edges(4, [
        (0, 1, (1, 3)), (1, 3, (1, 3)),
        (0, 2, (3, 1)), (2, 3, (3, 1)),
        (0, 3, (5, 5)),
    ])


@pytest.fixture
def chain():
    """v1..v5 as ids 0..4, unit costs (1, 1)."""
    return MultiGraph.from_edges(5, [(i, i + 1, (1, 1)) for i in range(4)])


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
