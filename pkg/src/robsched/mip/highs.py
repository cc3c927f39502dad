"""Backend that hands programs to the HiGHS solver shipped with SciPy."""
from __future__ import annotations

import time

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .program import MipSolution, MixedIntegerProgram


def solve_highs(program: MixedIntegerProgram, relax: bool = False,
                time_limit: float | None = None, node_limit: int | None = None) -> MipSolution:
    start = time.perf_counter()
    c = program.cost()
    sign = -1.0 if program.sense == "max" else 1.0
    lb, ub = program.bounds()
    if relax:
        lo, hi = program.row_bounds()
        A = program.matrix()
        eq = lo == hi
        ub_rows = ~eq
        A_ub = _stack([A[ub_rows & np.isfinite(hi)], -A[ub_rows & np.isfinite(lo)]])
        b_ub = np.concatenate([hi[ub_rows & np.isfinite(hi)], -lo[ub_rows & np.isfinite(lo)]])
        res = linprog(sign * c, A_ub=A_ub, b_ub=b_ub if A_ub is not None else None,
                      A_eq=A[eq] if eq.any() else None, b_eq=hi[eq] if eq.any() else None,
                      bounds=list(zip(lb, ub)), method="highs")
        elapsed = time.perf_counter() - start
        if res.status == 2:
            return MipSolution("infeasible", None, None, elapsed=elapsed)
        if res.status == 3:
            return MipSolution("unbounded", None, None, elapsed=elapsed)
        if res.status != 0:
            return MipSolution("limit", None, None, elapsed=elapsed, message=res.message)
        gap = None
        if hasattr(res, "ineqlin") and res.ineqlin is not None:
            dual = 0.0
            if A_ub is not None:
                dual += float(b_ub @ res.ineqlin.marginals)
            if eq.any():
                dual += float(hi[eq] @ res.eqlin.marginals)
            dual += float(lb[np.isfinite(lb)] @ res.lower.marginals[np.isfinite(lb)])
            dual += float(ub[np.isfinite(ub)] @ res.upper.marginals[np.isfinite(ub)])
            gap = abs(dual - res.fun)
        x = np.asarray(res.x)
        return MipSolution("optimal", float(c @ x + program.constant), x,
                           elapsed=elapsed, dual_gap=gap)
    # HiGHS presolve (as bundled with SciPy 1.15) can cut off the optimum of the
    # big-M adversary programs and report a worse point as optimal
    options = {"mip_rel_gap": 0.0, "presolve": False}
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    if node_limit is not None:
        options["node_limit"] = int(node_limit)
    lo, hi = program.row_bounds()
    constraints = LinearConstraint(program.matrix(), lo, hi) if program.n_rows else None
    res = milp(sign * c, constraints=constraints,
               integrality=np.array(program.integer, dtype=int),
               bounds=Bounds(lb, ub), options=options)
    elapsed = time.perf_counter() - start
    if res.status == 2:
        return MipSolution("infeasible", None, None, elapsed=elapsed)
    if res.status == 3:
        return MipSolution("unbounded", None, None, elapsed=elapsed)
    if res.x is None:
        return MipSolution("limit", None, None, elapsed=elapsed, message=res.message)
    x = np.asarray(res.x)
    status = "optimal" if res.status == 0 else "limit"
    if status == "optimal" and any(program.integer):
        x = _polish(program, sign * c, constraints, x, lb, ub)
    elapsed = time.perf_counter() - start
    return MipSolution(status, float(c @ x + program.constant), x, elapsed=elapsed,
                       message=res.message)


def _polish(program, c, constraints, x, lb, ub):
    """Re-solve the LP with integers fixed at their rounded values.

    HiGHS accepts integer values up to a small tolerance; multiplied by a
    big-M coefficient that slack can shift the objective visibly.  Fixing
    the rounded integers removes it.  The original point is kept if the
    fixed LP fails.
    """
    integer = np.array(program.integer, dtype=bool)
    lb, ub = lb.copy(), ub.copy()
    lb[integer] = ub[integer] = np.round(x[integer])
    res = milp(c, constraints=constraints, bounds=Bounds(lb, ub))
    return np.asarray(res.x) if res.status == 0 and res.x is not None else x


def _stack(blocks):
    from scipy import sparse
    blocks = [b for b in blocks if b.shape[0]]
    return sparse.vstack(blocks).tocsr() if blocks else None
