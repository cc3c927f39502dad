"""LP-based branch-and-bound with best-bound node selection."""
from __future__ import annotations

import heapq
import math
import time

import numpy as np

from .program import MipSolution, MixedIntegerProgram
from .simplex import solve_arrays

INT_TOL = 1e-6
NODE_LIMIT = 1_000_000


def solve_mip(program: MixedIntegerProgram, backend: str = "builtin",
              node_limit: int = NODE_LIMIT, time_limit: float | None = None) -> MipSolution:
    """Exact optimum of a mixed-integer program.

    ``backend="builtin"`` uses the dense simplex and the branch-and-bound
    below (deterministic, meant for small programs); ``"highs"`` delegates
    to HiGHS for the large programs built by the policies.
    """
    if backend == "highs":
        from .highs import solve_highs
        return solve_highs(program, time_limit=time_limit)
    if backend != "builtin":
        raise ValueError(f"unknown backend {backend!r}")
    start = time.perf_counter()
    sign = 1.0 if program.sense == "max" else -1.0
    c = sign * program.cost()
    A = program.matrix().toarray()
    lb0, ub0 = program.bounds()
    ints = np.flatnonzero(program.integer)

    gaps = [0.0]

    def relax(lb, ub):
        sol = solve_arrays(c, A, program.rels, program.rhs, lb, ub, "max")
        if sol.dual_gap is not None:
            gaps.append(sol.dual_gap)
        return sol

    def finish(status, best, x, nodes, msg=""):
        obj = None if best is None else sign * best + program.constant
        return MipSolution(status, obj, x, nodes=nodes, elapsed=time.perf_counter() - start,
                           dual_gap=max(gaps), message=msg)

    root = relax(lb0, ub0)
    if root.status != "optimal":
        return finish(root.status, None, None, 1)
    incumbent, best_x = -math.inf, None
    heap = [(-root.objective, 0, lb0, ub0, root.x)]
    counter, nodes = 1, 1
    while heap:
        neg_bound, _, lb, ub, x = heapq.heappop(heap)
        bound = -neg_bound
        if bound <= incumbent + 1e-9 * max(1.0, abs(incumbent)):
            break  # best-bound order: nothing left can improve
        frac = np.abs(x[ints] - np.round(x[ints])) if len(ints) else np.zeros(0)
        if len(ints) == 0 or frac.max() <= INT_TOL:
            incumbent, best_x = bound, x
            continue
        # Most fractional variable, lowest index on ties.
        j = int(ints[int(np.argmax(frac))])
        for side in (0, 1):
            clb, cub = lb.copy(), ub.copy()
            if side == 0:
                cub[j] = math.floor(x[j])
            else:
                clb[j] = math.ceil(x[j])
            if clb[j] > cub[j]:
                continue
            child = relax(clb, cub)
            nodes += 1
            if child.status == "optimal" and child.objective > incumbent:
                heapq.heappush(heap, (-child.objective, counter, clb, cub, child.x))
                counter += 1
            if nodes >= node_limit or (time_limit and time.perf_counter() - start > time_limit):
                x_out = None if best_x is None else _round_ints(best_x, ints)
                return finish("limit", None if best_x is None else incumbent, x_out, nodes,
                              "node or time limit reached")
    if best_x is None:
        return finish("infeasible", None, None, nodes)
    return finish("optimal", incumbent, _round_ints(best_x, ints), nodes)


def _round_ints(x, ints):
    x = x.copy()
    x[ints] = np.round(x[ints])
    return x
