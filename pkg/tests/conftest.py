import numpy as np
import pytest

from robsched import BudgetedSet, DiscreteScenarioSet, Instance

# Four tasks, five scenarios; row i of FOUR_TASK_BY_TASK lists task i's durations.
FOUR_TASK_BY_TASK = np.array([
    [3.0, 4.5, 4.75, 2.5, 0.25],
    [2.0, 2.0, 2.0, 3.5, 5.0],
    [3.0, 3.5, 3.0, 3.0, 3.5],
    [5.5, 4.0, 4.0, 4.0, 4.0],
])

# Three tasks under a budgeted set (nominal, deviation, budget).
THREE_TASK = ([0.0580, 0.1945, 0.5866], [0.95, 0.75, 0.48], 2.5)

# Acceptance outcomes, filled in by tests/test_acceptance.py and echoed at the end of the run.
ACCEPTANCE = {}


@pytest.fixture
def four_task():
    return Instance(4, 2, DiscreteScenarioSet(FOUR_TASK_BY_TASK.T), label="four-task")


@pytest.fixture
def three_task():
    return Instance(3, 2, BudgetedSet(*THREE_TASK), label="three-task")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
