"""Adjustable robust policy: exact min-max over all state-contingent schedules.

Two routes compute the same value.  ``solve_ar_dp`` runs backward
induction over (state, consistent-scenario subset) for discrete sets;
``solve_ar_milo`` builds the scenario tree and solves the adversary's
mixed-integer program, which also covers box and budgeted sets.
"""
from __future__ import annotations

import itertools
import math
import sys
from functools import lru_cache

import numpy as np

from ..errors import UnsupportedSetError
from ..mip import solve_mip
from ..mip.adversary import build_adversary_milo
from ..tree import build_tree
from .common import PolicyDecision, Problem, forced_value, setup


def solve_ar_dp(problem, state=None, m: int | None = None) -> PolicyDecision:
    """Backward induction for a discrete scenario set (exact integer arithmetic)."""
    p = setup(problem, state, m)
    if not p.discrete:
        raise UnsupportedSetError("backward induction needs a discrete scenario set")
    scen = p.base.units
    clock0 = p.to_units(p.state.clock)
    running0 = tuple(sorted((t, clock0 - p.to_units(e)) for t, e in p.state.running))
    subset0 = frozenset(np.flatnonzero(p.induced.scenario_mask()).tolist())
    m = p.m

    @lru_cache(maxsize=None)
    def finish_all(running, subset):
        return max(max(start + int(scen[s, t]) for t, start in running) for s in subset)

    @lru_cache(maxsize=None)
    def scheduler(clock, unstarted, running, subset):
        idle = m - len(running)
        if not unstarted:
            return finish_all(running, subset), ()
        if len(unstarted) <= idle:
            batch = tuple(sorted(unstarted))
            new = tuple(sorted(running + tuple((t, clock) for t in batch)))
            return adversary(clock, frozenset(), new, subset), batch
        best, choice = math.inf, None
        for batch in itertools.combinations(sorted(unstarted), idle):
            new = tuple(sorted(running + tuple((t, clock) for t in batch)))
            v = adversary(clock, unstarted - frozenset(batch), new, subset)
            if v < best:
                best, choice = v, batch
        return best, choice

    @lru_cache(maxsize=None)
    def adversary(clock, unstarted, running, subset):
        if not unstarted:
            return finish_all(running, subset)
        events = {}
        for s in sorted(subset):
            time, task = min((start + int(scen[s, t]), t) for t, start in running)
            events.setdefault((task, time), []).append(s)
        worst = -math.inf
        for (task, time), group in events.items():
            rest = tuple(x for x in running if x[0] != task)
            v, _ = scheduler(time, unstarted, rest, frozenset(group))
            worst = max(worst, v)
        return worst

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10_000))
    try:
        value, choice = scheduler(clock0, frozenset(p.unstarted), running0, subset0)
    finally:
        sys.setrecursionlimit(limit)
    return PolicyDecision(tuple(choice), value / p.base.scale)


def solve_ar_milo(problem, state=None, m: int | None = None,
                  backend: str = "highs") -> PolicyDecision:
    """Worst-case makespan of the optimal adjustable policy via the adversary program.

    The root is a scheduler node, so the optimum is the minimum over its
    children of each child's subtree program (subtrees below different root
    children share no variables).  Solving the children separately is
    faster than the full program and yields the decision directly: the
    lexicographically first child attaining the minimum.
    """
    p = setup(problem, state, m)
    if p.base.kind not in ("box", "budgeted", "discrete"):
        raise UnsupportedSetError(f"no embedding for {type(p.base).__name__}")
    if len(p.unstarted) <= p.idle:
        return PolicyDecision(tuple(p.unstarted), forced_value(p))
    if p.discrete:
        running = [(t, p.to_units(e) / p.base.scale) for t, e in p.state.running]
    else:
        running = list(p.state.running)
    tree = build_tree(p.n, p.m, p.unstarted, running)
    values = []
    for child in tree.root.children:
        sub = build_adversary_milo(tree, p.induced, root=child)
        values.append((_solve(sub, backend, p), child))
    value = min(v for v, _ in values)
    for v, child in values:
        if _same(v, value, p):
            node = tree.nodes[child]
            start = tuple(sorted(set(node.S) - set(tree.root.S)))
            return PolicyDecision(start, _absolute(value, p))
    raise RuntimeError("no root child attains the optimal value")


def _solve(prog, backend: str, p: Problem) -> float:
    sol = solve_mip(prog, backend=backend)
    if sol.status != "optimal":
        raise RuntimeError(f"adversary program ended with status {sol.status}")
    return float(round(sol.objective)) if p.discrete else sol.objective


def _same(a: float, b: float, p: Problem) -> bool:
    if p.discrete:
        return a == b
    return abs(a - b) <= 1e-6 * max(1.0, abs(b))


def _absolute(value: float, p: Problem) -> float:
    if p.discrete:
        return (p.to_units(p.state.clock) + int(value)) / p.base.scale
    return p.state.clock + value
