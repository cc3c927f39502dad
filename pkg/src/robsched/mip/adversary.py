"""The adversary's problem over a scenario tree as a mixed-integer program.

Every node v gets a value variable t_v.  Scheduler nodes take the minimum
of their children (t_v <= t_child), adversary nodes the maximum (binary
w_{v,c} switches off all but one of the rows t_v <= t_child + Mw * w_{v,c}).
Each leaf carries its own duration vector d_leaf together with a binary
z_leaf: either d_leaf is consistent with the leaf's completion order and
t_leaf is the leaf's makespan, or z_leaf = 1 and t_leaf drops by M.

Non-anticipativity ties the duration of task f across all leaves below the
scheduler node B at which f's completion was first observed (one shared
variable D_B per such node).  This is equivalent to tying every pair of
leaves on the finished set of their last common scheduler ancestor.

Discrete sets are embedded with per-leaf scenario selectors y_{leaf,s},
restricted to the scenarios that actually produce the leaf's order; values
are then integers in the set's units.
"""
from __future__ import annotations

import numpy as np

from ..errors import UnsupportedSetError
from ..tree import ADVERSARY, LEAF, SCHEDULER, ScenarioTree
from ..uncertainty import ConditionedSet, DiscreteScenarioSet, base_of, uview
from .program import MixedIntegerProgram


def _subtree(tree: ScenarioTree, root: int) -> list[int]:
    out, stack = [], [root]
    while stack:
        v = stack.pop()
        out.append(v)
        stack.extend(reversed(tree.nodes[v].children))
    return out


def build_adversary_milo(tree: ScenarioTree, U, root: int | None = None) -> MixedIntegerProgram:
    """Program whose optimum is the worst-case makespan (from the tree's root time).

    ``U`` must already be conditioned on the state the tree is rooted at.
    With ``root`` set, only that subtree is modelled.  The returned program
    carries ``node_var`` (node id -> t variable), ``root_node`` and ``scale``.
    """
    base = base_of(U)
    active = sorted(set(tree.tasks) | {t for t, _ in tree.running})
    elapsed_max = max([abs(e) for _, e in tree.running], default=0.0)
    discrete = isinstance(base, DiscreteScenarioSet)
    if discrete:
        mask = U.scenario_mask() if isinstance(U, ConditionedSet) else np.ones(base.R, bool)
        scen = base.units[mask].astype(float)
        scen_ids = np.flatnonzero(mask)
        dmax = scen.max(axis=0)
        dmin = scen.min(axis=0)
        scale = base.scale
    elif base.kind in ("box", "budgeted"):
        view = uview(U)
        dmax, dmin = view.dmax(), view.dmin()
        scale = 1
    else:
        raise UnsupportedSetError(f"no embedding for {type(base).__name__}")
    M = float(dmax[active].sum()) + elapsed_max + 1.0
    Mw = 2.0 * M
    root = tree.root.id if root is None else root
    ids = _subtree(tree, root)

    prog = MixedIntegerProgram(sense="max")
    prog.scale = scale
    prog.big_m = M
    prog.root_node = root
    t = {v: prog.add_var(f"t_{v}", -2.0 * M, M) for v in ids}
    prog.node_var = t
    prog.set_objective({t[root]: 1.0})

    # Shared duration of the task whose completion created each scheduler node.
    shared = {}
    for v in ids:
        node = tree.nodes[v]
        if node.kind == SCHEDULER and node.id != tree.root.id:
            f = node.F[-1]
            shared[v] = (f, prog.add_var(f"D_{v}", float(dmin[f]), float(dmax[f])))

    for v in ids:
        node = tree.nodes[v]
        if node.kind == SCHEDULER:
            for c in node.children:
                prog.add_constraint({t[v]: 1.0, t[c]: -1.0}, "<=", 0.0)
        elif node.kind == ADVERSARY:
            if len(node.children) == 1:
                prog.add_constraint({t[v]: 1.0, t[node.children[0]]: -1.0}, "<=", 0.0)
                continue
            ws = []
            for c in node.children:
                w = prog.add_binary(f"w_{v}_{c}")
                ws.append(w)
                prog.add_constraint({t[v]: 1.0, t[c]: -1.0, w: -Mw}, "<=", 0.0)
            prog.add_constraint({w: 1.0 for w in ws}, "<=", len(ws) - 1)

    # Scheduler ancestors of each leaf (for the non-anticipativity ties).
    ties_of = {}
    for v in ids:
        if tree.nodes[v].kind != LEAF:
            continue
        anc = []
        p = tree.nodes[v].parent
        while p is not None:
            if p in shared:
                anc.append(shared[p])
            p = tree.nodes[p].parent
        ties_of[v] = anc

    for v in ids:
        node = tree.nodes[v]
        if node.kind != LEAF:
            continue
        enc = tree.leaf_encoding(node)
        z = prog.add_binary(f"z_{v}")
        e0 = enc.e0 * scale
        if discrete:
            b = np.round(enc.b * scale)
            act = scen @ enc.E.T
            ok = np.all(np.where(enc.strict, act <= b - 1, act <= b), axis=1) \
                if len(b) else np.ones(len(scen), bool)
            sel = np.flatnonzero(ok)
            ys = {int(s): prog.add_binary(f"y_{v}_{int(scen_ids[s])}") for s in sel}
            row = {y: 1.0 for y in ys.values()}
            row[z] = 1.0
            prog.add_constraint(row, "=", 1.0)
            row = {t[v]: 1.0, z: M}
            for s, y in ys.items():
                row[y] = -float(enc.e @ scen[s])
            prog.add_constraint(row, "=", e0)
            for f, D in ties_of[v]:
                expr = {y: float(scen[s, f]) for s, y in ys.items()}
                expr[D] = -1.0
                prog.add_constraint({**expr, z: -M}, "<=", 0.0)
                prog.add_constraint({**expr, z: M}, ">=", 0.0)
        else:
            d = {a: prog.add_var(f"d_{v}_{a}", float(dmin[a]), float(dmax[a])) for a in active}
            if np.isfinite(view.budget):
                fixed_u = sum(view.ulo[k] for k in range(len(view.d0)) if k not in d)
                row, rhs = {}, view.budget - fixed_u
                for a in active:
                    if view.dbar[a] > 0:
                        row[d[a]] = 1.0 / view.dbar[a]
                        rhs += view.d0[a] / view.dbar[a]
                prog.add_constraint(row, "<=", rhs)
            for r in range(len(enc.b)):
                row = {d[a]: enc.E[r, a] for a in active if enc.E[r, a] != 0}
                row[z] = -M
                prog.add_constraint(row, "<=", float(enc.b[r]))
            row = {d[a]: -enc.e[a] for a in active if enc.e[a] != 0}
            row[t[v]] = 1.0
            row[z] = M
            prog.add_constraint(row, "=", e0)
            for f, D in ties_of[v]:
                prog.add_constraint({d[f]: 1.0, D: -1.0}, "=", 0.0)
    return prog
