"""Rolling-horizon simulation of a policy on one realized scenario."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..errors import EmptySetError, InvalidInputError
from ..model import Instance, State
from ..policies import (sa_decision, sl_decision, solve_ar_dp, solve_ar_milo, solve_ph,
                        twossa_decision)
from ..policies.common import PolicyDecision
from ..uncertainty import DiscreteScenarioSet, contains

POLICIES = {
    "sa": sa_decision,
    "sl": sl_decision,
    "ar-dp": solve_ar_dp,
    "ar-milo": solve_ar_milo,
    "2ssa": twossa_decision,
}
POLICY_NAMES = tuple(POLICIES) + ("ph",)


@dataclass(frozen=True)
class SimulationRecord:
    instance: str
    policy: str
    scenario: int
    realized: float
    promised: float
    first_decision: tuple
    trace: tuple = ()          # ("start", time, tasks) and ("finish", time, task) events
    solve_ms: float | None = None
    in_set: bool = True


def resolve_policy(policy):
    if callable(policy):
        return getattr(policy, "__name__", "custom"), policy
    if policy not in POLICIES:
        raise InvalidInputError(f"unknown policy {policy!r}; choose from {', '.join(POLICY_NAMES)}")
    return policy, POLICIES[policy]


def hindsight_record(instance: Instance, d, scenario: int = 0, instance_id: str = "") -> SimulationRecord:
    """The perfect-hindsight schedule for scenario ``d`` (promised = realized)."""
    part, value = solve_ph(d, instance.m)
    first = tuple(sorted(min(J) for J in part.machines if J))
    return SimulationRecord(instance_id, "ph", scenario, float(value), float(value), first,
                            in_set=contains(instance.uncertainty, d))


def rolling_horizon(policy, instance: Instance, d, first_decision=None,
                    root: PolicyDecision | None = None, scenario: int = 0,
                    instance_id: str = "", timing: bool = False) -> SimulationRecord:
    """Run ``policy`` against scenario ``d``, re-solving at every completion event.

    At time zero the policy picks one task per machine; whenever a task
    completes (ties: lowest index first) the set is conditioned on what has
    been observed and the policy picks the next task for the freed
    machine.  ``first_decision`` overrides the tasks started at time zero
    (the promise is still the policy's own).  ``root`` supplies an already
    computed time-zero decision.
    """
    if policy == "ph":
        return hindsight_record(instance, d, scenario, instance_id)
    name, solve = resolve_policy(policy)
    U = instance.uncertainty
    n, m = instance.n, instance.m
    d = np.asarray(d, dtype=float)
    if d.shape != (n,):
        raise InvalidInputError(f"scenario must have {n} durations")
    in_set = contains(U, d)
    if isinstance(U, DiscreteScenarioSet):
        scale = U.scale
        dur = [U.to_units(x) for x in d]
    else:
        scale = None
        dur = [float(x) for x in d]

    def to_time(x):
        return x / scale if scale else x

    start, finished, realized = {}, [], []
    clock = 0
    spent = 0.0
    promised = None
    first = None
    trace = []

    def current_state():
        running = tuple((t, to_time(clock - s)) for t, s in start.items() if t not in finished)
        return State(tuple(start), tuple(finished), tuple(realized), running, to_time(clock))

    while True:
        unstarted = [t for t in range(n) if t not in start]
        running = [t for t in start if t not in finished]
        idle = m - len(running)
        if idle > 0 and unstarted:
            state = current_state()
            decision = None
            if promised is None and root is not None:
                decision = root
            elif len(unstarted) > idle or promised is None:
                tic = time.perf_counter()
                try:
                    decision = solve(instance, state)
                except EmptySetError as exc:
                    if in_set:
                        raise RuntimeError("conditioned set became empty on an in-set scenario") from exc
                    raise
                spent += time.perf_counter() - tic
            if promised is None:
                promised = float(decision.value)
            if first is None and first_decision is not None:
                tasks = tuple(sorted(int(t) for t in first_decision))
            elif len(unstarted) <= idle:
                tasks = tuple(unstarted)
            else:
                tasks = tuple(sorted(decision.tasks))
            if not tasks or len(tasks) > idle or not set(tasks) <= set(unstarted):
                raise RuntimeError(f"policy {name} returned an invalid start set {tasks}")
            if first is None:
                first = tasks
            for t in tasks:
                start[t] = clock
            trace.append(("start", to_time(clock), tasks))
            continue
        if not running:
            break
        t_end, task = min((start[t] + dur[t], t) for t in running)
        clock = t_end
        finished.append(task)
        realized.append(to_time(dur[task]))
        trace.append(("finish", to_time(clock), task))

    makespan = to_time(max(start[t] + dur[t] for t in range(n)))
    return SimulationRecord(instance_id, name, scenario, float(makespan), promised, first,
                            tuple(trace), 1000.0 * spent if timing else None, in_set)
