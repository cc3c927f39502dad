"""Exact two-machine static allocation for continuous sets, by meet-in-the-middle.

The worst case of a machine's load is ``sum(base) + greedy gain``, where
the adversary spends its budget on the machine's tasks in order of
decreasing density.  Sort every item by density and split the free tasks
into a high-density half H and a low-density half L.  A machine spends
its budget on its H items first, so the budget left for its L items only
depends on how much capacity it received in H.  Unstarted tasks all have
the same capacity, so there are only a handful of distinct leftovers.

For each distinct pair of leftovers, the L half reduces to arrays F_A[J], F_B[J] over the
subsets J of L taken by machine A, and the best completion of an H choice
with machine offsets (a, b) is

    a + min( min{F_A[J] : F_A[J] - F_B[J] >= b - a},
             (b - a) + min{F_B[J] : F_A[J] - F_B[J] < b - a} ),

answered for all H choices at once with a sort, prefix/suffix minima and
binary search.  Enumeration over all partitions remains available as the
reference implementation.
"""
from __future__ import annotations

import math

import numpy as np

from .common import LoadModel, masks

TOL = 1e-9


def _greedy_rows(X, base, dens, cap, slack):
    """Base sum and greedy gain per row of membership matrix X (columns density-sorted).

    ``slack`` may be a scalar or a per-row vector.  Returns (base_sum, gain, used).
    """
    b = X @ base
    capm = X * cap
    before = np.cumsum(capm, axis=1) - capm
    s = np.asarray(slack, dtype=float)
    s = s[:, None] if s.ndim else s
    take = np.clip(s - before, 0.0, capm)
    return b, take @ dens, capm.sum(axis=1)


def _hull_query(FA, FB, delta):
    """For each delta: min over J of max(FA[J], FB[J] + delta)."""
    key = FA - FB
    order = np.argsort(-key, kind="stable")
    k_sorted = key[order]
    pre_a = np.minimum.accumulate(FA[order])                  # min FA over key >= threshold
    suf_b = np.minimum.accumulate(FB[order][::-1])[::-1]      # min FB over key < threshold
    # number of J with key >= delta: count of k_sorted >= delta (k_sorted is descending)
    cnt = np.searchsorted(-k_sorted, -delta, side="right")
    best = np.full(len(delta), math.inf)
    has_a = cnt > 0
    best[has_a] = pre_a[cnt[has_a] - 1]
    has_b = cnt < len(FA)
    best[has_b] = np.minimum(best[has_b], delta[has_b] + suf_b[cnt[has_b]])
    return best


def minmax_two(lm: LoadModel, free, PA, PB, cA=0.0, cB=0.0,
               need_A=False, need_B=False):
    """min over splits of ``free`` of max(load A, load B), continuous sets only.

    ``PA``/``PB`` are tasks pinned to machine A/B and ``cA``/``cB`` constant
    offsets.  ``need_A``/``need_B`` forbid leaving that machine with no free
    task.  Returns ``(value, A_tasks)`` where ``A_tasks`` is the
    lexicographically smallest sorted tuple of free tasks given to A among
    all optimal splits.
    """
    free, PA, PB = list(free), list(PA), list(PB)
    items = free + PA + PB
    tag = np.array([-1] * len(free) + [0] * len(PA) + [1] * len(PB))
    dens = lm.dens[items]
    order = np.lexsort((np.array(items), -dens))
    items = [items[k] for k in order]
    tag = tag[order]
    base = lm.base[items]
    cap = lm.cap[items]
    dens = lm.dens[items]
    slack = lm.slack if lm.slack > 0 else 0.0

    free_pos = np.flatnonzero(tag == -1)
    q = len(free_pos)
    h = (q + 1) // 2
    cut = free_pos[h - 1] + 1 if h > 0 else 0
    Hc, Lc = np.arange(cut), np.arange(cut, len(items))
    H_free = [k for k in free_pos if k < cut]
    L_free = [k for k in free_pos if k >= cut]
    ell = len(L_free)

    def membership(cols, free_cols, code_bits, machine):
        """Rows: subsets; columns: items in ``cols``; pinned items of ``machine`` always in."""
        X = np.zeros((code_bits.shape[0], len(cols)))
        pos = {c: j for j, c in enumerate(cols)}
        for j, c in enumerate(cols):
            if tag[c] == machine:
                X[:, j] = 1.0
        for b, c in enumerate(free_cols):
            X[:, pos[c]] = code_bits[:, b] if machine == 0 else ~code_bits[:, b]
        return X

    bits_H = masks(h, 0, 1 << h)
    XA = membership(Hc, H_free, bits_H, 0)
    XB = membership(Hc, H_free, bits_H, 1)
    bA, gA, uA = _greedy_rows(XA, base[Hc], dens[Hc], cap[Hc], slack)
    bB, gB, uB = _greedy_rows(XB, base[Hc], dens[Hc], cap[Hc], slack)
    alpha = bA + gA + cA
    beta = bB + gB + cB
    leftA = np.maximum(slack - uA, 0.0)
    leftB = np.maximum(slack - uB, 0.0)
    _, klass = np.unique(np.round(np.c_[leftA, leftB], 12), axis=0, return_inverse=True)
    klass = klass.ravel()

    bits_L = masks(ell, 0, 1 << ell)
    YA = membership(Lc, L_free, bits_L, 0)
    YB = membership(Lc, L_free, bits_L, 1)
    codes_H = np.arange(1 << h)
    values = np.full(1 << h, math.inf)
    cache = {}
    for c in range(int(klass.max()) + 1):
        rows = codes_H[klass == c]
        sA, sB = float(leftA[rows[0]]), float(leftB[rows[0]])
        bLA, gLA, _ = _greedy_rows(YA, base[Lc], dens[Lc], cap[Lc], sA)
        bLB, gLB, _ = _greedy_rows(YB, base[Lc], dens[Lc], cap[Lc], sB)
        FA, FB = bLA + gLA, bLB + gLB
        cache[c] = (FA, FB)
        values[rows] = alpha[rows] + _hull_query(FA, FB, beta[rows] - alpha[rows])

    def full_row(r):
        FA, FB = cache[int(klass[r])]
        v = np.maximum(alpha[r] + FA, beta[r] + FB)
        if need_A and r == 0:
            v = v.copy()
            v[0] = math.inf
        if need_B and r == (1 << h) - 1:
            v = v.copy()
            v[(1 << ell) - 1] = math.inf
        return v

    # Rows where an emptiness rule can bite are recomputed exactly.
    special = set()
    if need_A:
        special.add(0)
    if need_B:
        special.add((1 << h) - 1)
    for r in special:
        values[r] = full_row(r).min()

    best = float(values.min())
    if not math.isfinite(best):
        return math.inf, ()
    thr = best + TOL * max(1.0, abs(best))
    cands = []
    for r in np.flatnonzero(values <= thr):
        v = full_row(r)
        for j in np.flatnonzero(v <= thr):
            A = [items[H_free[b]] for b in range(h) if r >> b & 1]
            A += [items[L_free[b]] for b in range(ell) if j >> b & 1]
            cands.append(tuple(sorted(A)))
    return best, min(cands)


def minmax_two_enum(lm: LoadModel, free, PA, PB, cA=0.0, cB=0.0,
                    need_A=False, need_B=False, chunk: int = 1 << 14):
    """Reference implementation by scanning every split (any LoadModel)."""
    free, PA, PB = list(free), list(PA), list(PB)
    q = len(free)
    best, cands = math.inf, []
    for start in range(0, 1 << q, chunk):
        X = masks(q, start, min(1 << q, start + chunk))
        onesA = np.ones((len(X), len(PA)), bool)
        onesB = np.ones((len(X), len(PB)), bool)
        LA = lm.worst(free + PA, np.hstack([X, onesA])) + cA
        LB = lm.worst(free + PB, np.hstack([~X, onesB])) + cB
        val = np.maximum(LA, LB)
        codes = np.arange(start, start + len(X))
        if need_A:
            val[codes == 0] = math.inf
        if need_B:
            val[codes == (1 << q) - 1] = math.inf
        cmin = float(val.min())
        if cmin < best:
            best = cmin
        thr = best + (0.5 if lm.discrete else TOL * max(1.0, abs(best)))
        cands = [(c, v) for c, v in cands if v <= thr]
        cands.extend((int(codes[k]), float(val[k])) for k in np.flatnonzero(val <= thr))
    if not math.isfinite(best):
        return math.inf, ()
    sides = [tuple(sorted(free[j] for j in range(q) if c >> j & 1)) for c, _ in cands]
    return best, min(sides)
