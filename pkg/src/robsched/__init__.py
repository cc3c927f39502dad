"""Robust scheduling of tasks with uncertain durations on identical parallel machines."""
from .errors import (CapacityError, EmptySetError, InvalidInputError, InvalidTransitionError,
                     LimitError, NumericalInstabilityError, RobschedError, UnsupportedSetError)
from .model import (Instance, Partition, State, advance_state, evaluate_partition, list_schedule,
                    simulate_list, start_tasks)
from .uncertainty import (BoxSet, BudgetedSet, DiscreteScenarioSet, condition, contains,
                          max_linear)

__version__ = "0.1.0"
