import numpy as np
import pytest
from hypothesis import settings

from mtd_evolve.fsm import StrategyMachine

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def cycling_machine(targets=(1, 2, 4)) -> StrategyMachine:
    """Invest in ``targets`` in turn, one state per match, whatever it observes."""
    k = len(targets)
    actions = [0] * 16
    transitions = [[0] * 10 for _ in range(16)]
    for s, t in enumerate(targets):
        actions[s] = t
        transitions[s] = [(s + 1) % k] * 10
    return StrategyMachine.from_arrays(0, actions, transitions)


@pytest.fixture
def rng():
    return np.random.default_rng(20140601)
