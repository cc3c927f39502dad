"""Plumbing shared by the policy solvers."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import EmptySetError, InvalidInputError
from ..model import Instance, State
from ..uncertainty import ConditionedSet, DiscreteScenarioSet, base_of, condition, uview

REL_TOL = 1e-9


@dataclass(frozen=True)
class PolicyDecision:
    """What to start now and the worst-case makespan promised by the policy."""

    tasks: tuple[int, ...]
    value: float
    detail: object = None


@dataclass
class Problem:
    """A decision epoch: base set, machine count, state and the induced set."""

    base: object
    n: int
    m: int
    state: State
    induced: ConditionedSet

    @property
    def discrete(self) -> bool:
        return isinstance(self.base, DiscreteScenarioSet)

    @property
    def unstarted(self) -> tuple[int, ...]:
        return self.state.unstarted(self.n)

    @property
    def idle(self) -> int:
        return self.m - len(self.state.running)

    def to_units(self, x) -> int:
        return self.base.to_units(x)


def setup(problem, state: State | None = None, m: int | None = None) -> Problem:
    """Accept an Instance or a bare uncertainty set and condition it on ``state``."""
    if isinstance(problem, Instance):
        U, n = problem.uncertainty, problem.n
        m = problem.m if m is None else m
    else:
        U, n = problem, problem.dim
        m = 2 if m is None else m
    state = State() if state is None else state
    if len(state.running) > m:
        raise InvalidInputError("more running tasks than machines")
    induced = condition(U, state)
    if induced.is_empty:
        raise EmptySetError("the induced uncertainty set is empty")
    return Problem(base_of(U), n, m, state, induced)


def forced_value(p: Problem) -> float:
    """Worst-case makespan when every remaining task can start right now."""
    tasks = [t for t, _ in p.state.running] + list(p.unstarted)
    elapsed = p.state.elapsed
    if p.discrete:
        scen = p.base.units[p.induced.scenario_mask()]
        clock = p.to_units(p.state.clock)
        worst = max(int(scen[:, t].max()) - p.to_units(elapsed.get(t, 0)) for t in tasks)
        return (clock + worst) / p.base.scale
    v = uview(p.induced)
    dmax = v.dmax()
    return p.state.clock + max(float(dmax[t]) - elapsed.get(t, 0.0) for t in tasks)


class LoadModel:
    """Vectorised worst case of one machine's load given its task set.

    Continuous sets: the load of task set J is
    ``sum_J base + greedy(dens, cap over J, slack)``; discrete sets: the
    largest row sum over the consistent scenarios (in integer units).
    """

    def __init__(self, *, base=None, dens=None, cap=None, slack=None, scen=None):
        self.scen = scen
        self.base, self.dens, self.cap, self.slack = base, dens, cap, slack

    @classmethod
    def from_problem(cls, p: Problem) -> "LoadModel":
        if p.discrete:
            return cls(scen=p.base.units[p.induced.scenario_mask()].astype(float))
        v = uview(p.induced)
        return cls.from_view(v)

    @classmethod
    def from_view(cls, v, ulo=None, uhi=None) -> "LoadModel":
        ulo = v.ulo if ulo is None else ulo
        uhi = v.uhi if uhi is None else uhi
        return cls(base=v.d0 + v.dbar * ulo, dens=v.dbar.copy(), cap=uhi - ulo,
                   slack=v.budget - float(ulo.sum()))

    @property
    def discrete(self) -> bool:
        return self.scen is not None

    def worst(self, items, X) -> np.ndarray:
        """Worst-case total duration of the tasks ``items[X[k]]`` for each row k of X."""
        items = np.asarray(items, dtype=np.int64)
        X = np.asarray(X, dtype=float)
        if self.discrete:
            if len(items) == 0:
                return np.zeros(X.shape[0])
            return (X @ self.scen[:, items].T).max(axis=1)
        base = X @ self.base[items] if len(items) else np.zeros(X.shape[0])
        if not math.isfinite(self.slack):
            return base + (X @ (self.cap[items] * self.dens[items]) if len(items) else 0.0)
        if self.slack <= 0 or len(items) == 0:
            return base
        order = np.argsort(-self.dens[items], kind="stable")
        dens = self.dens[items][order]
        keep = dens > 0
        if not keep.any():
            return base
        Xs = X[:, order][:, keep]
        capm = Xs * self.cap[items][order][keep]
        before = np.cumsum(capm, axis=1) - capm
        take = np.clip(self.slack - before, 0.0, capm)
        return base + take @ dens[keep]


def masks(q: int, start: int, stop: int) -> np.ndarray:
    """Rows are the binary expansions (bit j = column j) of start..stop-1."""
    codes = np.arange(start, stop, dtype=np.int64)
    return ((codes[:, None] >> np.arange(q, dtype=np.int64)) & 1).astype(bool)


def close(a: float, b: float, discrete: bool) -> bool:
    if discrete:
        return abs(a - b) < 0.5
    return abs(a - b) <= REL_TOL * max(1.0, abs(a), abs(b))
