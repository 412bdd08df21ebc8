import pytest
from hypothesis import HealthCheck, settings

from teamdag import games

from helpers import ACCEPTANCE_LINES

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def fig1():
    return games.build_figure1_fixture()


@pytest.fixture(scope="session")
def kuhn3():
    return games.build_kuhn(3, 3)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
