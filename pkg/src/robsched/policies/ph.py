"""Perfect hindsight: the optimal partition when all durations are known."""
from __future__ import annotations

import math

import numpy as np

from ..errors import CapacityError, InvalidInputError
from ..model import Partition, as_numbers, evaluate_partition

MAX_TWO = 24     # meet-in-the-middle limit for two machines
MAX_MANY = 12    # depth-first search limit for m > 2


def _subset_sums(values: np.ndarray) -> np.ndarray:
    sums = np.zeros(1)
    for v in values:
        sums = np.concatenate([sums, sums + v])
    return sums  # index bit j <-> element j


def solve_ph(d, m: int = 2) -> tuple[Partition, float]:
    """Exact minimum-makespan partition of known durations ``d`` on ``m`` machines."""
    values = as_numbers(d)
    n = len(values)
    if m < 1:
        raise InvalidInputError("need at least one machine")
    if m == 1:
        part = Partition((tuple(range(n)),))
        return part, evaluate_partition(part, values)
    if m == 2:
        if n > MAX_TWO:
            raise CapacityError(f"two-machine hindsight solver handles n <= {MAX_TWO}")
        part = _two_machines(values)
    else:
        if n > MAX_MANY:
            raise CapacityError(f"m > 2 hindsight solver handles n <= {MAX_MANY}")
        part = _many_machines(values, m)
    return part, evaluate_partition(part, values)


def _two_machines(values) -> Partition:
    n = len(values)
    d = np.asarray(values, dtype=float)
    total = float(d.sum())
    half = n // 2
    left, right = _subset_sums(d[:half]), _subset_sums(d[half:])
    order = np.argsort(right, kind="stable")
    rs = right[order]
    target = total / 2 + 1e-9 * max(1.0, total)
    pos = np.searchsorted(rs, target - left, side="right") - 1
    ok = pos >= 0
    best = np.where(ok, left + rs[np.maximum(pos, 0)], -np.inf)
    i = int(np.argmax(best))
    code_l, code_r = i, int(order[pos[i]])
    A = [j for j in range(half) if code_l >> j & 1] + \
        [half + j for j in range(n - half) if code_r >> j & 1]
    B = [j for j in range(n) if j not in set(A)]
    return Partition((tuple(A), tuple(B))).canonical()


def _many_machines(values, m: int) -> Partition:
    n = len(values)
    order = sorted(range(n), key=lambda t: -values[t])
    loads = [0 * values[0]] * m
    assign = [0] * n
    # Start from the longest-processing-time schedule as incumbent.
    for t in order:
        j = min(range(m), key=lambda k: loads[k])
        loads[j] += values[t]
        assign[t] = j
    best = [max(loads), assign[:]]
    lower = max(max(values), sum(values) / m)
    loads = [0 * values[0]] * m
    cur = [0] * n

    def dfs(k):
        if best[0] <= lower:
            return
        if k == n:
            mk = max(loads)
            if mk < best[0]:
                best[0], best[1] = mk, cur[:]
            return
        t = order[k]
        seen = set()
        for j in range(m):
            if loads[j] in seen:
                continue  # identical machines: same load, same subtree
            seen.add(loads[j])
            if loads[j] + values[t] >= best[0]:
                continue
            loads[j] += values[t]
            cur[t] = j
            dfs(k + 1)
            loads[j] -= values[t]

    dfs(0)
    return Partition.from_assignment(best[1], m).canonical()


def ph_makespan(d, m: int = 2) -> float:
    return solve_ph(d, m)[1]
