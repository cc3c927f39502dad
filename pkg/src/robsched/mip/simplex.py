"""Dense two-phase primal simplex for small linear programs.

The program is brought to standard form (``A y = b``, ``y >= 0``, ``b >= 0``)
by shifting or mirroring bounded variables, splitting free ones and adding
slack/surplus columns.  Dantzig pricing is used until a run of degenerate
pivots is seen, after which Bland's rule takes over so the method cannot
cycle.  At the end the basis is refactorised to recover x and the dual
vector, and the primal/dual objective gap is reported.
"""
from __future__ import annotations

import math
import time

import numpy as np

from ..errors import NumericalInstabilityError
from .program import MipSolution, MixedIntegerProgram

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9
DEGENERATE_RUN = 50


class _StandardForm:
    """Maps x (original) <-> y (standard form): x = T y + offset."""

    def __init__(self, c, A, rels, rhs, lb, ub):
        n = len(c)
        cols, offset = [], np.zeros(n)
        extra_rows = []
        for j in range(n):
            lo, hi = lb[j], ub[j]
            if math.isfinite(lo):
                offset[j] = lo
                cols.append((j, 1.0))
                if math.isfinite(hi):
                    extra_rows.append((len(cols) - 1, hi - lo))
            elif math.isfinite(hi):
                offset[j] = hi
                cols.append((j, -1.0))
            else:
                cols.append((j, 1.0))
                cols.append((j, -1.0))
        ny = len(cols)
        T = np.zeros((n, ny))
        for k, (j, s) in enumerate(cols):
            T[j, k] = s
        self.T, self.offset = T, offset

        m0 = A.shape[0]
        rows = [A @ T] if m0 else []
        b = list(np.asarray(rhs, dtype=float) - (A @ offset if m0 else np.zeros(0)))
        rel = list(rels)
        for k, cap in extra_rows:
            r = np.zeros(ny)
            r[k] = 1.0
            rows.append(r[None, :])
            b.append(cap)
            rel.append("<=")
        M = np.vstack(rows) if rows else np.zeros((0, ny))
        b = np.asarray(b, dtype=float)

        n_slack = sum(1 for r in rel if r != "=")
        A_std = np.zeros((len(b), ny + n_slack))
        A_std[:, :ny] = M
        slack_of = {}
        s = ny
        for i, r in enumerate(rel):
            if r == "<=":
                A_std[i, s] = 1.0
            elif r == ">=":
                A_std[i, s] = -1.0
            if r != "=":
                slack_of[i] = s
                s += 1
        neg = b < 0
        A_std[neg] *= -1
        b = np.where(neg, -b, b)
        self.A, self.b = A_std, b
        self.c = np.concatenate([T.T @ c, np.zeros(n_slack)])
        self.const = float(c @ offset)
        self.slack_of = slack_of

    def to_x(self, y):
        return self.T @ y[: self.T.shape[1]] + self.offset


def _pivot(tab, r, k):
    piv = tab[r, k]
    if abs(piv) < PIVOT_TOL:
        raise NumericalInstabilityError(f"pivot magnitude {abs(piv):.3g} below {PIVOT_TOL}")
    tab[r] /= piv
    col = tab[:, k].copy()
    col[r] = 0.0
    tab -= np.outer(col, tab[r])


def _run(tab, basis, n_cols, max_iter):
    """Minimise the last-row objective of ``tab``. Returns 'optimal' or 'unbounded'."""
    m = tab.shape[0] - 1
    degenerate = 0
    for _ in range(max_iter):
        red = tab[-1, :n_cols]
        bland = degenerate >= DEGENERATE_RUN
        candidates = np.flatnonzero(red < -FEAS_TOL)
        if len(candidates) == 0:
            return "optimal"
        k = int(candidates[0]) if bland else int(candidates[np.argmin(red[candidates])])
        col = tab[:m, k]
        pos = col > FEAS_TOL
        if not pos.any():
            return "unbounded"
        ratios = np.full(m, np.inf)
        ratios[pos] = tab[:m, -1][pos] / col[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + FEAS_TOL * max(1.0, abs(best)))
        if bland:
            r = int(min(ties, key=lambda i: basis[i]))
        else:
            r = int(ties[np.argmax(col[ties])])
        degenerate = degenerate + 1 if best <= FEAS_TOL else 0
        _pivot(tab, r, k)
        basis[r] = k
    raise NumericalInstabilityError("simplex iteration limit reached")


def solve_arrays(c, A, rels, rhs, lb, ub, sense="max", max_iter=None) -> MipSolution:
    """Solve ``sense c@x`` subject to row relations and variable bounds."""
    start = time.perf_counter()
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, len(c))
    lb, ub = np.asarray(lb, dtype=float), np.asarray(ub, dtype=float)
    if np.any(lb > ub + FEAS_TOL):
        return MipSolution("infeasible", None, None, elapsed=time.perf_counter() - start)
    cmin = -c if sense == "max" else c
    sf = _StandardForm(cmin, A, rels, rhs, lb, ub)
    m, ncol = sf.A.shape
    max_iter = max_iter or 50 * (m + ncol) + 1000

    # Phase 1: artificial columns wherever no slack can start in the basis.
    basis = [-1] * m
    for i, s in sf.slack_of.items():
        if sf.A[i, s] > 0:
            basis[i] = s
    art_rows = [i for i in range(m) if basis[i] < 0]
    n_art = len(art_rows)
    tab = np.zeros((m + 1, ncol + n_art + 1))
    tab[:m, :ncol] = sf.A
    tab[:m, -1] = sf.b
    for a, i in enumerate(art_rows):
        tab[i, ncol + a] = 1.0
        basis[i] = ncol + a
    if n_art:
        tab[-1, ncol:ncol + n_art] = 1.0
        for i in art_rows:
            tab[-1] -= tab[i]
        _run(tab, basis, ncol + n_art, max_iter)
        if -tab[-1, -1] > 1e-7 * max(1.0, float(np.abs(sf.b).max(initial=0))):
            return MipSolution("infeasible", None, None, elapsed=time.perf_counter() - start)
        # Drive artificials out of the basis; drop rows that are redundant.
        keep = []
        for i in range(m):
            if basis[i] >= ncol:
                nz = np.flatnonzero(np.abs(tab[i, :ncol]) > 1e-9)
                if len(nz):
                    _pivot(tab, i, int(nz[0]))
                    basis[i] = int(nz[0])
                    keep.append(i)
            else:
                keep.append(i)
        tab = np.vstack([tab[keep], tab[-1:]])
        basis = [basis[i] for i in keep]
        tab = np.delete(tab, np.s_[ncol:ncol + n_art], axis=1)
        rows_kept = keep
    else:
        rows_kept = list(range(m))

    # Phase 2.
    mk = len(basis)
    tab[-1, :] = 0.0
    tab[-1, :ncol] = sf.c
    for i, k in enumerate(basis):
        tab[-1] -= sf.c[k] * tab[i]
    status = _run(tab, basis, ncol, max_iter)
    elapsed = time.perf_counter() - start
    if status == "unbounded":
        return MipSolution("unbounded", None, None, elapsed=elapsed)

    # Refactorise the basis for an accurate primal point and a dual vector.
    B = sf.A[np.ix_(rows_kept, basis)]
    b = sf.b[rows_kept]
    y = np.zeros(ncol)
    if mk:
        y[basis] = np.linalg.solve(B, b)
        dual = np.linalg.solve(B.T, sf.c[basis])
    else:
        dual = np.zeros(0)
    y = np.maximum(y, 0.0)
    primal = float(sf.c @ y)
    dual_obj = float(b @ dual)
    x = sf.to_x(y)
    obj = float(c @ x)
    gap = abs(primal - dual_obj)
    return MipSolution("optimal", obj, x, elapsed=elapsed, dual_gap=gap)


def solve_lp(program: MixedIntegerProgram, backend: str = "builtin") -> MipSolution:
    """LP relaxation of ``program`` (integrality marks are ignored)."""
    if backend == "highs":
        from .highs import solve_highs
        return solve_highs(program, relax=True)
    lb, ub = program.bounds()
    A = program.matrix().toarray()
    sol = solve_arrays(program.cost(), A, program.rels, program.rhs, lb, ub, program.sense)
    if sol.objective is not None:
        sol.objective += program.constant
    return sol
