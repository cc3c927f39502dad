"""Static list policy for discrete scenario sets: the best priority order of the unstarted tasks."""
from __future__ import annotations

import itertools
from typing import NamedTuple

import numpy as np

from ..errors import CapacityError, InvalidInputError, UnsupportedSetError
from .common import PolicyDecision, setup

MAX_TASKS = 8


class SLResult(NamedTuple):
    order: tuple[int, ...]
    value: float


def list_loads(perms: np.ndarray, scen: np.ndarray, free_at: np.ndarray) -> np.ndarray:
    """Makespan of every list (rows of ``perms``) under every scenario.

    ``free_at`` (R x m) is when each machine becomes available.  With
    identical machines the next task may go to any earliest-free machine
    without changing the makespan, so ties need no special care here.
    Returns a (P x R) array.
    """
    P = perms.shape[0]
    loads = np.broadcast_to(free_at, (P,) + free_at.shape).copy()
    rows = np.arange(scen.shape[0])[None, :]
    for j in range(perms.shape[1]):
        dur = scen[:, perms[:, j]].T                 # P x R
        k = np.argmin(loads, axis=2)                  # P x R
        np.add.at(loads, (np.arange(P)[:, None], rows, k), dur)
    return loads.max(axis=2)


def solve_sl(problem, state=None, m: int | None = None) -> SLResult:
    """Lexicographically first permutation minimising the worst-case makespan."""
    p = setup(problem, state, m)
    if not p.discrete:
        raise UnsupportedSetError("the static list policy is implemented for discrete sets only")
    free = list(p.unstarted)
    if not free:
        raise InvalidInputError("no unstarted task left")
    if len(free) > MAX_TASKS:
        raise CapacityError(f"{len(free)} unstarted tasks; permutation enumeration allows {MAX_TASKS}")
    scen = p.base.units[p.induced.scenario_mask()].astype(np.int64)
    clock = p.to_units(p.state.clock)
    free_at = np.full((scen.shape[0], p.m), clock, dtype=np.int64)
    for j, (t, e) in enumerate(p.state.running):
        free_at[:, j] = clock - p.to_units(e) + scen[:, t]
    perms = np.array(list(itertools.permutations(free)), dtype=np.int64)
    worst = list_loads(perms, scen, free_at).max(axis=1)
    k = int(np.argmin(worst))
    return SLResult(tuple(int(t) for t in perms[k]), int(worst[k]) / p.base.scale)


def sl_decision(problem, state=None, m: int | None = None) -> PolicyDecision:
    p = setup(problem, state, m)
    order, value = solve_sl(problem, state, m)
    return PolicyDecision(tuple(sorted(order[:p.idle])), value, order)
