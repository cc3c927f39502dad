"""Uncertainty sets over task durations, conditioning on a state, and linear worst cases.

Continuous sets (box and budgeted) are handled in "u-space": a duration
vector is ``d = d0 + dbar * u`` with ``ulo <= u <= uhi`` and, for budgeted
sets, ``sum(u) <= budget``.  A box ``[l, h]`` is the same thing with
``d0 = l``, ``dbar = h - l`` and no budget.  Conditioning only moves
``ulo``/``uhi``, so every worst-case question stays a small LP with a
greedy solution.

Discrete sets store their scenarios as exact integers in units of
``1/scale`` time (``scale`` is 10 for sets rounded to tenths).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySetError, InvalidInputError
from .model import State

TOL = 1e-9


class BoxSet:
    """Independent intervals ``lower_i <= d_i <= upper_i``."""

    kind = "box"

    def __init__(self, lower, upper):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise InvalidInputError("lower and upper must be vectors of equal length")
        if np.any(self.lower < 0) or np.any(self.lower > self.upper):
            raise InvalidInputError("need 0 <= lower <= upper")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def to_dict(self) -> dict:
        return {"lower": self.lower.tolist(), "upper": self.upper.tolist()}

    def __repr__(self):
        return f"BoxSet(lower={self.lower.tolist()}, upper={self.upper.tolist()})"


class BudgetedSet:
    """``d = d0 + u * dbar`` with ``u`` in ``[0, 1]^n`` and ``sum(u) <= budget``."""

    kind = "budgeted"

    def __init__(self, nominal, deviation, budget, alpha=None):
        self.nominal = np.asarray(nominal, dtype=float)
        self.deviation = np.asarray(deviation, dtype=float)
        self.budget = float(budget)
        self.alpha = alpha
        if self.nominal.shape != self.deviation.shape or self.nominal.ndim != 1:
            raise InvalidInputError("nominal and deviation must be vectors of equal length")
        if np.any(self.nominal <= 0) or np.any(self.deviation < 0):
            raise InvalidInputError("need nominal > 0 and deviation >= 0")
        if not 0 <= self.budget <= self.dim:
            raise InvalidInputError(f"budget must lie in [0, {self.dim}], got {budget}")

    @classmethod
    def proportional(cls, nominal, alpha: float, budget: float) -> "BudgetedSet":
        nominal = np.asarray(nominal, dtype=float)
        return cls(nominal, alpha * nominal, budget, alpha=float(alpha))

    @property
    def dim(self) -> int:
        return len(self.nominal)

    def to_dict(self) -> dict:
        out = {"nominal": self.nominal.tolist(), "deviation": self.deviation.tolist(),
               "budget": self.budget}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        return out

    def __repr__(self):
        return (f"BudgetedSet(nominal={self.nominal.tolist()}, "
                f"deviation={self.deviation.tolist()}, budget={self.budget})")


def _detect_scale(values: np.ndarray) -> int:
    for scale in (1, 10, 100, 1000, 10000, 100000, 1000000):
        scaled = values * scale
        if np.all(np.abs(scaled - np.round(scaled)) <= 1e-6 * np.maximum(1.0, np.abs(scaled))):
            return scale
    raise InvalidInputError("scenario values need more than six decimal places")


class DiscreteScenarioSet:
    """A finite list of scenarios held as exact integers (time = units / scale)."""

    kind = "discrete"

    def __init__(self, scenarios, scale: int | None = None):
        values = np.asarray(scenarios, dtype=float)
        if values.ndim != 2 or values.shape[0] < 1:
            raise InvalidInputError("scenarios must be a non-empty R x n array")
        self.scale = int(scale) if scale is not None else _detect_scale(values)
        units = np.round(values * self.scale)
        if np.any(np.abs(units - values * self.scale) > 1e-6 * np.maximum(1.0, units)):
            raise InvalidInputError(f"scenario values are not multiples of 1/{self.scale}")
        self.units = units.astype(np.int64)
        self.units.setflags(write=False)
        if np.any(self.units <= 0):
            raise InvalidInputError("all scenario durations must be positive")

    @classmethod
    def from_units(cls, units, scale: int) -> "DiscreteScenarioSet":
        units = np.asarray(units, dtype=np.int64)
        return cls(units / scale, scale=scale)

    @property
    def dim(self) -> int:
        return self.units.shape[1]

    @property
    def R(self) -> int:
        return self.units.shape[0]

    @property
    def scenarios(self) -> np.ndarray:
        return self.units / self.scale

    def to_units(self, x) -> int:
        """Convert a time value to integer units, insisting that it is exact."""
        v = x * self.scale
        r = round(v)
        if abs(v - r) > 1e-6 * max(1.0, abs(v)):
            raise InvalidInputError(f"time {x} is not a multiple of 1/{self.scale}")
        return int(r)

    def to_dict(self) -> dict:
        return {"scale": self.scale, "units": self.units.tolist()}

    def __repr__(self):
        return f"DiscreteScenarioSet(R={self.R}, n={self.dim}, scale={self.scale})"


@dataclass(frozen=True)
class UView:
    """u-space description of a (conditioned) continuous set."""

    d0: np.ndarray
    dbar: np.ndarray
    ulo: np.ndarray
    uhi: np.ndarray
    budget: float          # total budget on sum(u); inf for boxes
    empty: bool = False

    @property
    def slack(self) -> float:
        """Budget left after every coordinate sits at its lower bound."""
        return self.budget - float(self.ulo.sum())

    def dmax(self) -> np.ndarray:
        return self.d0 + self.dbar * self.uhi

    def dmin(self) -> np.ndarray:
        return self.d0 + self.dbar * self.ulo


@dataclass(frozen=True)
class ConditionedSet:
    """The induced set ``{d in base : d_k = D_k (k in F), d_i >= elapsed_i (i in I)}``.

    ``strict`` lists running tasks whose floor is strict: they were running
    when the last finisher completed and have a lower index, so under the
    lowest-index tie-break they cannot have completed at that same instant.
    Strictness only matters for discrete sets (continuous sets use closures).
    """

    base: object
    fixed: dict = field(default_factory=dict)
    floors: dict = field(default_factory=dict)
    strict: frozenset = frozenset()

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def kind(self) -> str:
        return self.base.kind

    @property
    def is_empty(self) -> bool:
        if isinstance(self.base, DiscreteScenarioSet):
            return not self.scenario_mask().any()
        return uview(self).empty

    def scenario_mask(self) -> np.ndarray:
        base = self.base
        if not isinstance(base, DiscreteScenarioSet):
            raise TypeError("scenario_mask is only defined for discrete sets")
        mask = np.ones(base.R, dtype=bool)
        for k, v in self.fixed.items():
            x = v * base.scale
            if abs(x - round(x)) > 1e-6 * max(1.0, abs(x)):
                return np.zeros(base.R, dtype=bool)
            mask &= base.units[:, k] == round(x)
        for k, v in self.floors.items():
            x = v * base.scale
            if k in self.strict:
                mask &= base.units[:, k] >= math.floor(x + 1e-6) + 1
            else:
                mask &= base.units[:, k] >= math.ceil(x - 1e-6)
        return mask


def base_of(U):
    return U.base if isinstance(U, ConditionedSet) else U


def condition(U, state: State) -> ConditionedSet:
    """Induced uncertainty set for ``state`` (conditioning always starts from the base set)."""
    base = base_of(U)
    fixed = dict(zip(state.finished, state.realized))
    floors = dict(state.running)
    strict = frozenset()
    if state.finished:
        last = state.finished[-1]
        strict = frozenset(t for t in floors if t < last)
    return ConditionedSet(base, fixed, floors, strict)


def uview(U) -> UView:
    """u-space view of a box, budgeted or conditioned continuous set."""
    base = base_of(U)
    if isinstance(base, BoxSet):
        d0, dbar, budget = base.lower, base.upper - base.lower, math.inf
    elif isinstance(base, BudgetedSet):
        d0, dbar, budget = base.nominal, base.deviation, base.budget
    else:
        raise TypeError(f"no u-space view for {type(base).__name__}")
    n = len(d0)
    ulo, uhi = np.zeros(n), np.ones(n)
    empty = False
    if isinstance(U, ConditionedSet):
        for k, v in U.fixed.items():
            if dbar[k] > 0:
                u = (v - d0[k]) / dbar[k]
                if u < -1e-7 or u > 1 + 1e-7:
                    empty = True
                ulo[k] = uhi[k] = min(max(u, 0.0), 1.0)
            else:
                empty |= abs(v - d0[k]) > 1e-7 * max(1.0, d0[k])
                ulo[k] = uhi[k] = 0.0
        for k, v in U.floors.items():
            if dbar[k] > 0:
                f = (v - d0[k]) / dbar[k]
                if f > uhi[k] + 1e-7:
                    empty = True
                ulo[k] = max(ulo[k], min(max(f, 0.0), uhi[k]))
            else:
                empty |= v > d0[k] + 1e-7 * max(1.0, d0[k])
    if ulo.sum() > budget + 1e-7:
        empty = True
    return UView(d0, dbar, ulo, uhi, budget, empty)


def greedy_gain(density: np.ndarray, cap: np.ndarray, slack: float) -> tuple[float, np.ndarray]:
    """Fractional knapsack: spend ``slack`` on the highest ``density`` first, at most ``cap`` each."""
    take = np.zeros(len(density))
    if slack <= 0:
        return 0.0, take
    order = np.argsort(-density, kind="stable")
    left = slack
    for i in order:
        if density[i] <= 0 or left <= 0:
            break
        take[i] = min(cap[i], left)
        left -= take[i]
    return float(density @ take), take


def contains(U, d) -> bool:
    """Membership test: exact for discrete sets, tolerance 1e-9 otherwise."""
    d = np.asarray(d, dtype=float)
    if d.shape != (U.dim,):
        raise InvalidInputError(f"expected a vector of length {U.dim}")
    base = base_of(U)
    if isinstance(base, DiscreteScenarioSet):
        x = d * base.scale
        if np.any(np.abs(x - np.round(x)) > 1e-6 * np.maximum(1.0, np.abs(x))):
            return False
        row = np.round(x).astype(np.int64)
        mask = U.scenario_mask() if isinstance(U, ConditionedSet) else np.ones(base.R, bool)
        return bool(np.any(np.all(base.units[mask] == row, axis=1)))
    v = uview(U)
    if v.empty:
        return False
    if np.any(d < v.dmin() - TOL) or np.any(d > v.dmax() + TOL):
        return False
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(v.dbar > 0, (d - v.d0) / np.where(v.dbar > 0, v.dbar, 1.0), 0.0)
    fixed_ok = np.all(np.abs(d - v.d0)[v.dbar == 0] <= TOL)
    return bool(fixed_ok and u.sum() <= v.budget + TOL)


def max_linear(U, c, extra=None):
    """Maximize ``c @ d`` over the set (optionally intersected with ``A d <= b`` rows).

    ``extra`` is a list of ``(a, b)`` pairs.  Returns ``(value, d)``.
    Raises EmptySetError if nothing is feasible.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (U.dim,):
        raise InvalidInputError(f"expected a weight vector of length {U.dim}")
    extra = list(extra or [])
    base = base_of(U)
    if isinstance(base, DiscreteScenarioSet):
        mask = U.scenario_mask() if isinstance(U, ConditionedSet) else np.ones(base.R, bool)
        rows = base.scenarios[mask]
        for a, b in extra:
            rows = rows[rows @ np.asarray(a, dtype=float) <= b + TOL]
        if len(rows) == 0:
            raise EmptySetError("no scenario satisfies the conditions")
        values = rows @ c
        k = int(np.argmax(values))
        return float(values[k]), rows[k].copy()
    v = uview(U)
    if v.empty:
        raise EmptySetError("the conditioned set is empty")
    if extra:
        return _max_linear_lp(v, c, extra)
    density = c * v.dbar
    gain, take = greedy_gain(density, v.uhi - v.ulo, v.slack)
    u = v.ulo + take
    d = v.d0 + v.dbar * u
    return float(c @ v.dmin() + gain), d


def _max_linear_lp(v: UView, c, extra):
    from .mip import MixedIntegerProgram, solve_lp

    n = len(c)
    prog = MixedIntegerProgram(sense="max")
    idx = [prog.add_var(f"u_{i}", v.ulo[i], v.uhi[i]) for i in range(n)]
    prog.set_objective({i: c[i] * v.dbar[i] for i in range(n) if c[i] * v.dbar[i] != 0},
                       constant=float(c @ v.d0))
    if math.isfinite(v.budget):
        prog.add_constraint({i: 1.0 for i in idx}, "<=", v.budget)
    for a, b in extra:
        a = np.asarray(a, dtype=float)
        prog.add_constraint({i: a[i] * v.dbar[i] for i in range(n) if a[i] * v.dbar[i] != 0},
                            "<=", b - float(a @ v.d0))
    sol = solve_lp(prog)
    if sol.status == "infeasible":
        raise EmptySetError("the set is empty under the extra constraints")
    u = np.asarray(sol.x)
    return sol.objective, v.d0 + v.dbar * u


def set_from_dict(kind: str, payload: dict):
    """Inverse of ``to_dict`` for the three base set kinds."""
    if kind == "box":
        return BoxSet(payload["lower"], payload["upper"])
    if kind == "budgeted":
        return BudgetedSet(payload["nominal"], payload["deviation"], payload["budget"],
                           alpha=payload.get("alpha"))
    if kind == "discrete":
        return DiscreteScenarioSet.from_units(payload["units"], payload["scale"])
    raise InvalidInputError(f"unknown set kind {kind!r}")
