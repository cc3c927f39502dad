"""Two-stage static allocation (2SSA) on two machines.

The scheduler starts two tasks (or, mid-horizon, one task next to the
running one).  When the first of the pair completes it observes which
one and when, then commits to a static allocation of everything left.
For a pair (i, j) the adversary first picks which task finishes first and
its duration, then the rest of the scenario; the pair's value is the
worse of the two branches and the scheduler takes the best pair.

Each branch of a continuous set is solved by column-and-constraint
generation.  The master is a MILP over one scenario per known column
sharing the first finisher's duration; the subproblem is an exact
two-machine static allocation with that duration pinned and the
survivor's duration floored so it cannot finish first.  Discrete sets are
handled exactly by grouping the consistent scenarios on the observed
event.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError, UnsupportedSetError
from ..mip import MixedIntegerProgram, solve_mip
from ..uncertainty import uview
from .common import LoadModel, PolicyDecision, Problem, forced_value, setup
from .twomachine import minmax_two, minmax_two_enum

CCG_TOL = 1e-7
MAX_COLUMNS = 100


@dataclass(frozen=True)
class TwoStagePlan:
    """Best pair, its per-branch worst cases and the promised makespan (absolute time)."""

    pair: tuple[int, int]
    start: tuple[int, ...]
    branches: dict
    value: float
    status: str = "optimal"
    columns: int = 0
    history: tuple = field(default=(), compare=False)


@dataclass
class _Branch:
    value: float
    status: str = "optimal"
    columns: int = 0
    history: list = field(default_factory=list)   # (upper, lower) per master solve


def solve_2ssa(problem, state=None, m: int | None = None, tol: float = CCG_TOL,
               max_columns: int = MAX_COLUMNS, prune: bool = True) -> TwoStagePlan:
    """Optimal two-stage plan for the current decision epoch.

    Pairs are examined in lexicographic order and a later pair must be
    strictly better to win.  With ``prune`` a pair is abandoned as soon as
    one of its branches is proven no better than the incumbent; pass
    ``prune=False`` to obtain exact branch values for every pair examined.
    """
    p = setup(problem, state, m)
    if p.m != 2:
        raise UnsupportedSetError("two-stage static allocation is defined for two machines")
    if p.base.kind not in ("box", "budgeted", "discrete"):
        raise UnsupportedSetError(f"no two-stage solver for {type(p.base).__name__}")
    free = list(p.unstarted)
    if not free:
        raise InvalidInputError("no unstarted task left")
    running = p.state.running_tasks
    if len(free) <= p.idle:
        start = tuple(free)
        pair = tuple(sorted(running + start))
        return TwoStagePlan(pair if len(pair) == 2 else pair * 2, start, {}, forced_value(p))
    if running:
        pairs = [((running[0], k), (k,)) for k in free]
    else:
        pairs = [((i, j), (i, j)) for i, j in itertools.combinations(free, 2)]

    solver = _DiscreteBranch(p) if p.discrete else _ContinuousBranch(p, tol, max_columns)
    best = None
    for pair, start in pairs:
        cutoff = best.value - tol if (prune and best is not None) else math.inf
        a, b = pair
        branches = {}
        worst = -math.inf
        for first, second in _branch_order(solver, a, b):
            res = solver.solve(first, second, cutoff)
            branches[first] = res
            worst = max(worst, res.value)
            if worst >= cutoff:
                break
        if best is not None and worst >= best.value - tol:
            continue
        status = "limit" if any(r.status == "limit" for r in branches.values()) else "optimal"
        best = TwoStagePlan(
            pair=tuple(sorted(pair)), start=start,
            branches={k: solver.absolute(r.value) for k, r in branches.items()},
            value=worst, status=status,
            columns=sum(r.columns for r in branches.values()),
            history=tuple((k, tuple(r.history)) for k, r in branches.items()))
    return TwoStagePlan(best.pair, best.start, best.branches, solver.absolute(best.value),
                        best.status, best.columns, best.history)


def twossa_decision(problem, state=None, m: int | None = None, **kw) -> PolicyDecision:
    plan = solve_2ssa(problem, state, m, **kw)
    return PolicyDecision(tuple(sorted(plan.start)), plan.value, plan)


def _branch_order(solver, a, b):
    """Try the branch with the larger cheap lower bound first (it prunes sooner)."""
    la, lb = solver.quick_bound(a, b), solver.quick_bound(b, a)
    return [(a, b), (b, a)] if la >= lb else [(b, a), (a, b)]


class _DiscreteBranch:
    """Exact branch values for a discrete set, in integer units from the clock."""

    def __init__(self, p: Problem):
        self.p = p
        self.scen = p.base.units[p.induced.scenario_mask()].astype(np.int64)
        self.clock = p.to_units(p.state.clock)
        self.elapsed = {t: p.to_units(e) for t, e in p.state.running}
        self.free = list(p.unstarted)
        self._cache = {}

    def absolute(self, v: float) -> float:
        return (self.clock + round(v)) / self.p.base.scale if math.isfinite(v) else v

    def _groups(self, first, second):
        S = self.scen
        cp, cq = self.elapsed.get(first, 0), self.elapsed.get(second, 0)
        rem_p, rem_q = S[:, first] - cp, S[:, second] - cq
        ok = rem_p < rem_q if first > second else rem_p <= rem_q
        keep = np.flatnonzero(ok)
        groups = {}
        for s in keep:
            groups.setdefault(int(S[s, first]), []).append(s)
        return [groups[k] for k in sorted(groups)], cp, cq

    def quick_bound(self, first, second) -> float:
        return 0.0

    def solve(self, first, second, cutoff=math.inf) -> _Branch:
        groups, cp, cq = self._groups(first, second)
        rest = [t for t in self.free if t not in (first, second)]
        worst = -math.inf
        for g in groups:
            lm = LoadModel(scen=self.scen[g].astype(float))
            v, _ = minmax_two_enum(lm, rest, [first], [second], -cp, -cq)
            worst = max(worst, float(round(v)))
            if worst >= cutoff:
                break
        return _Branch(worst, columns=len(groups))


class _ContinuousBranch:
    """Column-and-constraint generation for box and budgeted sets (time from the clock)."""

    def __init__(self, p: Problem, tol: float, max_columns: int):
        self.p, self.tol, self.max_columns = p, tol, max_columns
        self.v = uview(p.induced)
        self.elapsed = p.state.elapsed
        self.free = list(p.unstarted)
        self.active = sorted(self.free + list(p.state.running_tasks))
        dmax = self.v.dmax()
        self.big = float(sum(dmax[a] for a in self.active)) + max(self.elapsed.values(), default=0.0) + 1.0
        self._seeds = {}

    def absolute(self, v: float) -> float:
        return self.p.state.clock + v

    # feasibility of the event "first finishes first, after u_first"
    def _survivor_floor(self, first, second, u):
        v = self.v
        cp, cq = self.elapsed.get(first, 0.0), self.elapsed.get(second, 0.0)
        need = v.d0[first] + v.dbar[first] * u - cp + cq
        if v.dbar[second] > 0:
            uq = max(v.ulo[second], (need - v.d0[second]) / v.dbar[second])
            if uq > v.uhi[second] + 1e-12:
                return None
        else:
            if v.d0[second] < need - 1e-12 * max(1.0, abs(need)):
                return None
            uq = v.ulo[second]
        others = float(v.ulo.sum()) - v.ulo[first] - v.ulo[second]
        if u + uq + others > v.budget + 1e-12:
            return None
        return min(uq, v.uhi[second])

    def _u_range(self, first, second):
        lo, hi = float(self.v.ulo[first]), float(self.v.uhi[first])
        if self._survivor_floor(first, second, lo) is None:
            return None
        if self._survivor_floor(first, second, hi) is not None:
            return lo, hi
        a, b = lo, hi
        for _ in range(60):
            mid = 0.5 * (a + b)
            if self._survivor_floor(first, second, mid) is None:
                b = mid
            else:
                a = mid
        return lo, a

    def _sub(self, first, second, u):
        """Best static allocation once ``first`` is known to finish with u_first = u."""
        v = self.v
        ulo, uhi = v.ulo.copy(), v.uhi.copy()
        ulo[first] = uhi[first] = u
        ulo[second] = self._survivor_floor(first, second, u)
        lm = LoadModel.from_view(v, ulo, uhi)
        rest = [t for t in self.free if t not in (first, second)]
        cp, cq = self.elapsed.get(first, 0.0), self.elapsed.get(second, 0.0)
        value, A = minmax_two(lm, rest, [first], [second], -cp, -cq)
        return value, frozenset(A) | {first}

    def _seed(self, first, second):
        key = (first, second)
        if key not in self._seeds:
            rng = self._u_range(first, second)
            if rng is None:
                self._seeds[key] = None
            else:
                lo, hi = rng
                pts = sorted({lo, hi, 0.5 * (lo + hi)})
                self._seeds[key] = [(u,) + self._sub(first, second, u) for u in pts]
        return self._seeds[key]

    def quick_bound(self, first, second) -> float:
        seeds = self._seed(first, second)
        return -math.inf if seeds is None else max(s[1] for s in seeds)

    def _initial_column(self, first, second):
        """Longest-nominal-first greedy split with ``first`` on A and ``second`` on B."""
        v = self.v
        cp, cq = self.elapsed.get(first, 0.0), self.elapsed.get(second, 0.0)
        loads = [v.d0[first] - cp, v.d0[second] - cq]
        A = {first}
        rest = [t for t in self.free if t not in (first, second)]
        for t in sorted(rest, key=lambda t: (-v.d0[t], t)):
            k = 0 if loads[0] <= loads[1] else 1
            loads[k] += v.d0[t]
            if k == 0:
                A.add(t)
        return frozenset(A)

    def solve(self, first, second, cutoff=math.inf) -> _Branch:
        seeds = self._seed(first, second)
        if seeds is None:
            return _Branch(-math.inf, columns=0)
        lower = max(s[1] for s in seeds)
        if lower >= cutoff:
            return _Branch(lower, columns=0)
        columns = [self._initial_column(first, second)]
        for s in seeds:
            if s[2] not in columns:
                columns.append(s[2])
        history = []
        while True:
            upper, u = self._master(first, second, columns)
            value, col = self._sub(first, second, u)
            lower = max(lower, value)
            history.append((upper, lower))
            if lower >= upper - self.tol:
                return _Branch(lower, "optimal", len(columns), history)
            if lower >= cutoff:
                return _Branch(lower, "optimal", len(columns), history)
            if col in columns or len(columns) >= self.max_columns:
                status = "optimal" if col in columns else "limit"
                return _Branch(upper, status, len(columns), history)
            columns.append(col)

    def _master(self, first, second, columns):
        """Adversary's best scenario per column with a shared first-finisher duration."""
        v, act = self.v, self.active
        cp, cq = self.elapsed.get(first, 0.0), self.elapsed.get(second, 0.0)
        M = self.big
        fixed = float(v.ulo.sum()) - sum(v.ulo[a] for a in act)
        prog = MixedIntegerProgram(sense="max")
        t = prog.add_var("t", -M, M)
        prog.set_objective({t: 1.0})
        up = prog.add_var("u_first", v.ulo[first], v.uhi[first])
        for k, A in enumerate(columns):
            u = {a: prog.add_var(f"u_{k}_{a}", v.ulo[a], v.uhi[a]) for a in act if a != first}
            u[first] = up
            tk = prog.add_var(f"t_{k}", -M, M)
            b = prog.add_binary(f"b_{k}")
            prog.add_constraint({t: 1.0, tk: -1.0}, "<=", 0.0)
            prog.add_constraint({up: v.dbar[first], u[second]: -v.dbar[second]}, "<=",
                                v.d0[second] - cq - v.d0[first] + cp)
            if math.isfinite(v.budget):
                prog.add_constraint({x: 1.0 for x in u.values()}, "<=", v.budget - fixed)
            for side, c, sign in ((A, cp, 1.0), (frozenset(act) - A, cq, -1.0)):
                row = {tk: 1.0, b: -M * sign}
                for a in side:
                    row[u[a]] = row.get(u[a], 0.0) - v.dbar[a]
                rhs = float(sum(v.d0[a] for a in side)) - c + (M if sign < 0 else 0.0)
                prog.add_constraint(row, "<=", rhs)
        sol = solve_mip(prog, backend="highs")
        if sol.status != "optimal":
            raise RuntimeError(f"two-stage master ended with status {sol.status}")
        u_first = min(max(float(sol.x[up]), v.ulo[first]), v.uhi[first])
        rng = self._u_range(first, second)
        u_first = min(u_first, rng[1])
        return sol.objective, u_first
