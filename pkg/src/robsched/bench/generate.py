"""Seeded instance generators and the scenario sampler for budgeted sets."""
from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from ..model import Instance
from ..uncertainty import BudgetedSet, DiscreteScenarioSet, base_of, uview

SMALL_NOMINAL = (0.1, 2.0)
SMALL_DEVIATION = (0.1, 5.0)
LARGE_NOMINAL = (0.5, 5.0)
LARGE_RATIO = (0.5, 1.0)
MIN_DURATION = 0.1


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_ball(rng, n: int, size: int) -> np.ndarray:
    """Uniform draws from {u >= 0 : ||u||_2 <= 1}, by rejection from the unit cube."""
    out = np.empty((0, n))
    while len(out) < size:
        u = rng.random((max(2 * size, 64), n))
        out = np.vstack([out, u[np.einsum("ij,ij->i", u, u) <= 1.0]])
    return out[:size]


def generate_small_instance(seed, kind: str = "I", n: int = 5, R: int = 15, m: int = 2,
                            label: str = "") -> Instance:
    """Discrete scenario instance: d = d0 + u * dbar rounded to tenths (at least 0.1).

    ``kind`` "I" draws u uniformly from the nonnegative part of the unit
    ball, "II" uniformly from the unit cube [0, 1]^n.
    """
    if kind not in ("I", "II"):
        raise InvalidInputError(f"unknown small-instance type {kind!r}")
    rng = _rng(seed)
    d0 = rng.uniform(*SMALL_NOMINAL, size=n)
    dbar = rng.uniform(*SMALL_DEVIATION, size=n)
    u = sample_ball(rng, n, R) if kind == "I" else rng.random((R, n))
    units = np.maximum(np.rint((d0 + u * dbar) * 10), MIN_DURATION * 10).astype(np.int64)
    U = DiscreteScenarioSet.from_units(units, 10)
    return Instance(n, m, U, label=label, seed=seed if isinstance(seed, int) else None)


def generate_budgeted_instance(seed, n: int, gamma: float, m: int = 2,
                               proportional: bool = False, label: str = "") -> Instance:
    """Budgeted instance with d0 ~ U(0.5, 5) and dbar = ratio * d0, ratio ~ U(0.5, 1).

    The ratio is drawn per task by default; ``proportional`` draws a single
    ratio for the whole instance, which is what the analytical bounds assume.
    """
    if not 0 <= gamma <= n:
        raise InvalidInputError(f"budget {gamma} outside [0, {n}]")
    rng = _rng(seed)
    d0 = rng.uniform(*LARGE_NOMINAL, size=n)
    if proportional:
        alpha = float(rng.uniform(*LARGE_RATIO))
        U = BudgetedSet.proportional(d0, alpha, gamma)
    else:
        U = BudgetedSet(d0, rng.uniform(*LARGE_RATIO, size=n) * d0, gamma)
    return Instance(n, m, U, label=label, seed=seed if isinstance(seed, int) else None)


def sample_scenario(U, seed) -> np.ndarray:
    """u ~ U[0,1]^n, scaled down onto the budget when it is exceeded; returns d0 + u * dbar."""
    rng = _rng(seed)
    base = base_of(U)
    if isinstance(base, DiscreteScenarioSet):
        return base.scenarios[rng.integers(base.R)].copy()
    v = uview(base)
    u = rng.random(len(v.d0))
    total = u.sum()
    if total > v.budget:
        u = u * (v.budget / total)
    return v.d0 + v.dbar * u
