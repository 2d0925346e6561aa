import pytest

from thermcas.dielectric import DielectricModel
from thermcas.modes import LayerStack
from thermcas.units import ev

# lines collected by test_acceptance and echoed in the terminal summary
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def gold():
    return DielectricModel.drude_model(ev(9.0), ev(0.035), name="gold")


@pytest.fixture(scope="session")
def gold_plasma():
    return DielectricModel.plasma_model(ev(9.0), name="gold-plasma")


@pytest.fixture(scope="session")
def ideal():
    return DielectricModel.ideal_metal()


@pytest.fixture(scope="session")
def vacuum():
    return DielectricModel.vacuum()


@pytest.fixture(scope="session")
def gold_stack(gold):
    return lambda d: LayerStack.symmetric(gold, d)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
