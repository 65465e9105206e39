import pytest

from helpers import TWO_HUB_EDGES, make_network


@pytest.fixture
def path_net():
    return make_network([(1, 2, 100), (2, 3, 60)], depots=(1,))


@pytest.fixture
def triangle_net():
    return make_network([(1, 2, 5), (2, 3, 5), (1, 3, 20)], depots=(1,))


@pytest.fixture
def two_hub_net():
    return make_network(TWO_HUB_EDGES, depots=(2, 3))


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
