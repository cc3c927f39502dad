"""Static allocation: choose a task-to-machine partition that minimises the worst-case makespan."""
from __future__ import annotations

import math
from typing import NamedTuple


from ..errors import InvalidInputError, UnsupportedSetError
from ..mip import MixedIntegerProgram, solve_mip
from ..model import Partition
from .common import LoadModel, PolicyDecision, Problem, setup
from .twomachine import minmax_two, minmax_two_enum

ENUM_LIMIT = 26     # largest number of free tasks for the exact two-machine routes


class SAResult(NamedTuple):
    partition: Partition
    value: float


def solve_sa(problem, state=None, m: int | None = None, offsets=None,
             backend: str = "auto") -> SAResult:
    """Optimal static allocation of the unstarted tasks.

    Mid-horizon, a running task stays on its machine and its conditioned
    remaining time is part of that machine's load (jointly with the tasks
    queued behind it, so the adversary's budget is shared correctly).
    Machines that are idle now must receive at least one task; this never
    hurts, because moving one task from a busy machine to an idle one
    lowers or keeps every load.  ``offsets`` adds constant head starts
    per machine.  The returned value is an absolute time.

    ``backend``: ``"auto"`` uses the exact two-machine search when m = 2
    and at most ENUM_LIMIT tasks are free (meet-in-the-middle for
    continuous sets, a full scan for discrete ones), otherwise solves a
    MILP with HiGHS; ``"enum"`` forces the full scan and ``"highs"`` and
    ``"builtin"`` force the MILP.
    """
    p = setup(problem, state, m)
    if not p.unstarted:
        raise InvalidInputError("no unstarted task left to allocate")
    if p.idle < 1:
        raise InvalidInputError("no idle machine")
    if offsets is not None and len(offsets) != p.m:
        raise InvalidInputError("need one offset per machine")
    if backend == "enum" or (backend == "auto" and p.m == 2 and len(p.unstarted) <= ENUM_LIMIT):
        if p.m != 2:
            raise UnsupportedSetError("the exhaustive scan is for two machines")
        return _scan_two(p, offsets, exhaustive=backend == "enum")
    return _sa_milp(p, offsets, "highs" if backend == "auto" else backend)


def sa_decision(problem, state=None, m: int | None = None, **kw) -> PolicyDecision:
    """First tasks of an optimal static allocation (lowest index per idle machine)."""
    p = setup(problem, state, m)
    part, value = solve_sa(problem, state, m, **kw)
    busy = set(p.state.running_tasks)
    starts = tuple(sorted(min(J) for J in part.machines if J and not busy & set(J)))
    return PolicyDecision(starts, value, part)


def _units(p: Problem, x) -> float:
    return float(p.to_units(x)) if p.discrete else float(x)


def _to_time(p: Problem, v: float) -> float:
    return (p.to_units(p.state.clock) + round(v)) / p.base.scale if p.discrete \
        else p.state.clock + v


def _scan_two(p: Problem, offsets, exhaustive: bool = False) -> SAResult:
    lm = LoadModel.from_problem(p)
    T = list(p.unstarted)
    off = [0.0, 0.0] if offsets is None else [_units(p, o) for o in offsets]
    if p.state.running:
        (r, e), = p.state.running
        PA, PB, free = [], [r], T
        cA, cB = off[0], off[1] - _units(p, e)
    else:
        PA, PB, free = [T[0]], [], T[1:]
        cA, cB = off[0], off[1]
    solver = minmax_two_enum if (lm.discrete or exhaustive) else minmax_two
    best, A = solver(lm, free, PA, PB, cA, cB, need_A=not PA, need_B=not PB)
    A = tuple(sorted(PA + list(A)))
    B = tuple(sorted(set(free + PB) - set(A)))
    if lm.discrete:
        best = round(best)
    return SAResult(Partition((A, B)), _to_time(p, best))


def _sa_milp(p: Problem, offsets, backend: str) -> SAResult:
    lm = LoadModel.from_problem(p)
    T = list(p.unstarted)
    running = list(p.state.running)
    off = [0.0] * p.m if offsets is None else [_units(p, o) for o in offsets]
    prog = MixedIntegerProgram(sense="min")
    t = prog.add_var("t", -math.inf, math.inf)
    prog.set_objective({t: 1.0})
    x = {(j, i): prog.add_binary(f"x_{j}_{i}") for j in range(p.m) for i in T}
    for i in T:
        prog.add_constraint({x[j, i]: 1.0 for j in range(p.m)}, "=", 1.0)
    for j in range(len(running), p.m):
        prog.add_constraint({x[j, i]: 1.0 for i in T}, ">=", 1.0)
    if not running:
        prog.add_constraint({x[0, T[0]]: 1.0}, "=", 1.0)
    for j in range(p.m):
        pinned = [running[j][0]] if j < len(running) else []
        const = off[j] - (_units(p, running[j][1]) if pinned else 0.0)
        if lm.discrete:
            for s in range(lm.scen.shape[0]):
                row = {x[j, i]: -lm.scen[s, i] for i in T}
                row[t] = 1.0
                prog.add_constraint(row, ">=", const + sum(lm.scen[s, k] for k in pinned))
            continue
        const += sum(lm.base[k] for k in pinned)
        row = {t: 1.0}
        if not math.isfinite(lm.slack):
            for i in T:
                row[x[j, i]] = -(lm.base[i] + lm.cap[i] * lm.dens[i])
            const += sum(lm.cap[k] * lm.dens[k] for k in pinned)
            prog.add_constraint(row, ">=", const)
            continue
        for i in T:
            row[x[j, i]] = -lm.base[i]
        if lm.slack > 0:
            lam = prog.add_var(f"lam_{j}", 0.0)
            row[lam] = -lm.slack
            for i in T + pinned:
                if lm.dens[i] <= 0 or lm.cap[i] <= 0:
                    continue
                mu = prog.add_var(f"mu_{j}_{i}", 0.0)
                row[mu] = -lm.cap[i]
                if i in pinned:
                    prog.add_constraint({lam: 1.0, mu: 1.0}, ">=", lm.dens[i])
                else:
                    prog.add_constraint({lam: 1.0, mu: 1.0, x[j, i]: -lm.dens[i]}, ">=", 0.0)
        prog.add_constraint(row, ">=", const)
    sol = solve_mip(prog, backend=backend)
    if sol.status != "optimal":
        raise RuntimeError(f"static allocation MILP ended with status {sol.status}")
    machines = []
    for j in range(p.m):
        J = [running[j][0]] if j < len(running) else []
        J += [i for i in T if sol.x[x[j, i]] > 0.5]
        machines.append(tuple(J))
    value = sol.objective
    if lm.discrete:
        value = round(value)
    return SAResult(Partition(tuple(machines)), _to_time(p, value))
