"""Core scheduling objects: instances, partitions, list schedules and system states.

Tasks are numbered 0..n-1 and machines 0..m-1. Durations may be Python
ints (exact integer units, used by the discrete-scenario pipeline) or
floats; every function here preserves the numeric type it is given.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError, InvalidTransitionError

# Two float event times closer than this are treated as simultaneous.
TIME_TOL = 1e-9


def as_numbers(d) -> list:
    """Return ``d`` as a flat list of Python numbers (ints stay ints)."""
    arr = np.asarray(d)
    if arr.ndim != 1:
        raise InvalidInputError(f"expected a duration vector, got shape {arr.shape}")
    if arr.dtype.kind not in "iuf":
        raise InvalidInputError(f"durations must be numeric, got dtype {arr.dtype}")
    values = arr.tolist()
    if any(v < 0 for v in values):
        raise InvalidInputError("durations must be nonnegative")
    return values


def _tol(x) -> float:
    return 0 if isinstance(x, (int, np.integer)) else TIME_TOL


@dataclass(frozen=True)
class Instance:
    """A scheduling problem: n tasks, m identical machines and an uncertainty set."""

    n: int
    m: int
    uncertainty: object
    label: str = ""
    seed: int | None = None

    def __post_init__(self):
        if not (isinstance(self.n, int) and isinstance(self.m, int)):
            raise InvalidInputError("n and m must be integers")
        if not self.n > self.m >= 2:
            raise InvalidInputError(f"need n > m >= 2, got n={self.n}, m={self.m}")
        dim = getattr(self.uncertainty, "dim", None)
        if dim != self.n:
            raise InvalidInputError(f"uncertainty set has dimension {dim}, expected {self.n}")


@dataclass(frozen=True)
class Partition:
    """Ordered assignment of tasks to machines, ``machines[j]`` sorted ascending."""

    machines: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        machines = tuple(tuple(sorted(int(t) for t in J)) for J in self.machines)
        flat = [t for J in machines for t in J]
        if len(flat) != len(set(flat)):
            raise InvalidInputError("a task is assigned to more than one machine")
        object.__setattr__(self, "machines", machines)

    @classmethod
    def from_assignment(cls, assignment: Sequence[int], m: int | None = None) -> "Partition":
        assignment = [int(a) for a in assignment]
        m = m if m is not None else max(assignment) + 1
        if any(not 0 <= a < m for a in assignment):
            raise InvalidInputError("machine index out of range")
        return cls(tuple(tuple(t for t, a in enumerate(assignment) if a == j) for j in range(m)))

    @property
    def m(self) -> int:
        return len(self.machines)

    @property
    def tasks(self) -> frozenset:
        return frozenset(t for J in self.machines for t in J)

    def machine_of(self, task: int) -> int:
        for j, J in enumerate(self.machines):
            if task in J:
                return j
        raise KeyError(task)

    def canonical(self) -> "Partition":
        """Machines reordered by their smallest task; empty machines last."""
        return Partition(tuple(sorted(self.machines, key=lambda J: (not J, J))))

    def __str__(self) -> str:
        return "(" + ",".join("{" + ",".join(map(str, J)) + "}" for J in self.machines) + ")"


def evaluate_partition(partition, d) -> float:
    """Makespan of a static allocation: the largest machine load under ``d``."""
    d = as_numbers(d)
    J = partition if isinstance(partition, Partition) else Partition(tuple(partition))
    if J.tasks != frozenset(range(len(d))):
        raise InvalidInputError(
            f"partition covers tasks {sorted(J.tasks)} but d has {len(d)} entries")
    return max(sum((d[t] for t in machine), 0 * d[0]) for machine in J.machines)


def list_schedule(order: Sequence[int], d, m: int, busy: Iterable[tuple[int, float]] = (),
                  clock=None):
    """Event-driven list scheduling, optionally continuing from busy machines.

    ``busy`` holds ``(task, start_time)`` pairs already occupying machines
    0, 1, ... in that order and ``clock`` is the current time (default 0).
    Tasks in ``order`` start, one by one, on the machine that becomes idle
    first; simultaneous completions are resolved in favour of the lowest
    task index and idle machines are filled lowest index first.

    Returns ``(machine_of, completion, makespan, trace)`` where ``trace``
    lists ``(time, task, "start"|"finish")`` events in order.
    """
    d = list(d)
    busy = list(busy)
    if len(busy) > m:
        raise InvalidInputError("more running tasks than machines")
    machine_of, completion, trace = {}, {}, []
    running = {}  # task -> completion time
    idle = list(range(len(busy), m))
    for j, (task, start) in enumerate(busy):
        machine_of[task] = j
        running[task] = start + d[task]
    queue = list(order)
    clock = 0 * d[0] if clock is None else clock
    pos = 0
    while True:
        while idle and pos < len(queue):
            task = queue[pos]
            pos += 1
            j = idle.pop(0)
            machine_of[task] = j
            running[task] = clock + d[task]
            trace.append((clock, task, "start"))
        if not running:
            break
        first = min(running.values())
        tol = _tol(first)
        task = min(t for t, c in running.items() if c - first <= tol)
        clock = running.pop(task)
        completion[task] = clock
        trace.append((clock, task, "finish"))
        idle.append(machine_of[task])
        idle.sort()
    makespan = max(completion.values())
    return machine_of, completion, makespan, trace


def simulate_list(order: Sequence[int], d, m: int) -> tuple[Partition, float]:
    """Run the static list policy ``order`` on durations ``d`` from time zero."""
    d = as_numbers(d)
    order = [int(t) for t in order]
    if sorted(order) != list(range(len(d))):
        raise InvalidInputError("order must be a permutation of all task ids")
    if m < 1:
        raise InvalidInputError("need at least one machine")
    machine_of, _, makespan, _ = list_schedule(order, d, m)
    return Partition.from_assignment([machine_of[t] for t in range(len(d))], m), makespan


@dataclass(frozen=True)
class State:
    """System state (S, F, D, I, elapsed) at a decision epoch.

    ``running`` holds ``(task, elapsed)`` pairs sorted by task id, and
    ``clock`` is the completion time of the last finished task.
    """

    started: tuple[int, ...] = ()
    finished: tuple[int, ...] = ()
    realized: tuple = ()
    running: tuple[tuple[int, float], ...] = ()
    clock: float = 0

    def __post_init__(self):
        running = tuple(sorted((int(t), e) for t, e in self.running))
        object.__setattr__(self, "running", running)
        S, F = set(self.started), set(self.finished)
        I = {t for t, _ in running}
        if len(S) != len(self.started) or len(F) != len(self.finished):
            raise InvalidInputError("duplicate task in started/finished")
        if not (F | I <= S and not F & I and len(S) == len(F) + len(I)):
            raise InvalidInputError("started tasks must be exactly finished + running")
        if len(self.realized) != len(self.finished):
            raise InvalidInputError("one realized duration per finished task")
        if any(e < 0 for _, e in running):
            raise InvalidInputError("elapsed times must be nonnegative")

    @property
    def running_tasks(self) -> tuple[int, ...]:
        return tuple(t for t, _ in self.running)

    @property
    def elapsed(self) -> dict:
        return dict(self.running)

    def durations(self) -> dict:
        return dict(zip(self.finished, self.realized))

    def unstarted(self, n: int) -> tuple[int, ...]:
        S = set(self.started)
        return tuple(t for t in range(n) if t not in S)

    def start_time(self, task: int) -> float:
        return self.clock - self.elapsed[task]


def start_tasks(state: State, tasks: Iterable[int]) -> State:
    """Start ``tasks`` at the current clock (elapsed time zero)."""
    tasks = [int(t) for t in tasks]
    if set(tasks) & set(state.started) or len(set(tasks)) != len(tasks):
        raise InvalidTransitionError(f"tasks {tasks} already started")
    zero = 0 * state.clock
    return State(state.started + tuple(tasks), state.finished, state.realized,
                 state.running + tuple((t, zero) for t in tasks), state.clock)


def advance_state(state: State, task: int, time) -> State:
    """Record the completion of running ``task`` at absolute ``time``."""
    elapsed = state.elapsed
    if task not in elapsed:
        raise InvalidTransitionError(f"task {task} is not running")
    step = time - state.clock
    if step < -_tol(step):
        raise InvalidTransitionError(f"completion at {time} precedes clock {state.clock}")
    step = max(step, 0 * step)
    duration = elapsed[task] + step
    running = tuple((t, e + step) for t, e in state.running if t != task)
    return State(state.started, state.finished + (task,), state.realized + (duration,),
                 running, time)
