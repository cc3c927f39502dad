"""Closed-form performance bounds for two machines under proportional budgeted sets.

``bound_sa_ph`` bounds the ratio of the static-allocation worst case to
the perfect-hindsight worst case; ``bound_rh_ph`` bounds the same ratio
for any rolling-horizon policy that never leaves a machine idle while
work is waiting.  Both need d_bar = alpha * d0 with d0 inside [a_lo, a_hi].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .model import Partition
from .policies.common import masks
from .policies.ph import solve_ph
from .uncertainty import BudgetedSet

SCAN_LIMIT = 24


@dataclass(frozen=True)
class BoundInputs:
    nominal: tuple
    alpha: float
    budget: float
    a_lo: float
    a_hi: float

    def __post_init__(self):
        d0 = np.asarray(self.nominal, dtype=float)
        if d0.ndim != 1 or len(d0) < 2:
            raise InvalidInputError("need a nominal vector with at least two tasks")
        if self.alpha <= 0:
            raise InvalidInputError("alpha must be positive")
        if not 0 <= self.budget <= len(d0):
            raise InvalidInputError(f"budget {self.budget} outside [0, {len(d0)}]")
        if self.a_lo <= 0 or self.a_lo > self.a_hi:
            raise InvalidInputError("need 0 < a_lo <= a_hi")
        if d0.min() < self.a_lo - 1e-12 or d0.max() > self.a_hi + 1e-12:
            raise InvalidInputError("nominal durations must lie in [a_lo, a_hi]")

    @property
    def n(self) -> int:
        return len(self.nominal)

    @classmethod
    def from_set(cls, U: BudgetedSet, a_lo=None, a_hi=None) -> "BoundInputs":
        """Read the inputs off a proportional budgeted set (support defaults to min/max of d0)."""
        d0, dev = U.nominal, U.deviation
        alpha = U.alpha if U.alpha is not None else float(dev[0] / d0[0])
        if not np.allclose(dev, alpha * d0, rtol=1e-9, atol=0.0):
            raise InvalidInputError("deviations are not proportional to the nominal durations")
        return cls(tuple(float(x) for x in d0), float(alpha), float(U.budget),
                   float(d0.min()) if a_lo is None else float(a_lo),
                   float(d0.max()) if a_hi is None else float(a_hi))


def nominal_partition(d0) -> Partition:
    """Minimum-makespan partition of ``d0``; ties go to the lexicographically smallest
    first machine (which always holds task 0)."""
    d = np.asarray(d0, dtype=float)
    n = len(d)
    if n > SCAN_LIMIT:
        return solve_ph(d, 2)[0]
    X = masks(n - 1, 0, 1 << (n - 1))
    A = np.hstack([np.ones((len(X), 1), bool), X])
    load = A @ d
    mk = np.maximum(load, d.sum() - load)
    best = mk.min()
    hits = np.flatnonzero(mk <= best + 1e-12 * max(1.0, best))
    sides = [tuple(int(i) for i in np.flatnonzero(A[k])) for k in hits]
    first = min(sides)
    return Partition((first, tuple(i for i in range(n) if i not in first)))


def top_share(values, budget: float) -> float:
    """(sum of the floor(budget) largest values + fractional part * next one) / sum(values)."""
    v = sorted((float(x) for x in values), reverse=True)
    k = min(len(v), math.floor(budget))
    frac = min(budget, len(v)) - k
    head = v[:k] + ([frac * v[k]] if k < len(v) and frac > 0 else [])
    return math.fsum(head) / math.fsum(v)


def bound_sa_ph(inputs: BoundInputs, partition: Partition | None = None) -> float:
    """Upper bound on (static allocation worst case) / (hindsight worst case)."""
    d0 = np.asarray(inputs.nominal, dtype=float)
    part = nominal_partition(d0) if partition is None else partition
    n, a, g = inputs.n, inputs.alpha, inputs.budget
    share = max(top_share(d0[list(S)], g) for S in part.machines if S)
    # written so that budget = n gives the same float in numerator and denominator
    return (n + n * a * share) / (n + g * a)


def bound_rh_ph(inputs: BoundInputs) -> float:
    """Upper bound on (rolling-horizon realized worst case) / (hindsight worst case)."""
    if inputs.a_lo <= 0:
        raise InvalidInputError("a_lo must be positive")
    a, g = inputs.alpha, inputs.budget
    return 1.0 + inputs.a_hi * min(1.0 + a, 1.0 + a * g) / (inputs.a_lo * (inputs.n + a * g))


def ph_lower_bound_sa(inputs: BoundInputs, partition: Partition | None = None) -> float:
    """Hindsight lower bound used for the static-allocation ratio.

    Spreading the budget evenly (u_i = budget / n) scales every duration by
    1 + alpha * budget / n, so hindsight can do no better than that factor
    times the nominal optimum.
    """
    d0 = np.asarray(inputs.nominal, dtype=float)
    part = nominal_partition(d0) if partition is None else partition
    nominal = max(math.fsum(d0[list(S)]) for S in part.machines)
    return (1.0 + inputs.alpha * inputs.budget / inputs.n) * nominal


def ph_lower_bound_rh(inputs: BoundInputs) -> float:
    """Hindsight lower bound used for the rolling-horizon ratio: half the largest total work."""
    d0 = np.asarray(inputs.nominal, dtype=float)
    return 0.5 * math.fsum(d0) * (1.0 + inputs.alpha * top_share(d0, inputs.budget))
