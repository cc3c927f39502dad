"""Scenario tree of the scheduler/adversary game.

Nodes are labelled by sigma = (S, F): the start order and the completion
order so far.  Scheduler nodes choose what to start, adversary nodes choose
which running task completes next, and leaves are complete histories.
When exactly one unstarted task remains it is started automatically, so
the last adversary node of every branch fixes the whole remaining
completion order and has the leaves as direct children.

A tree can also be rooted at a mid-horizon state: ``running`` gives the
tasks already in process with their elapsed times, and leaf encodings then
measure time from that moment (running task r completes at d_r - elapsed_r).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import CapacityError, InvalidInputError

NODE_LIMIT = 10_000_000

SCHEDULER, ADVERSARY, LEAF = "scheduler", "adversary", "leaf"


@dataclass
class TreeNode:
    id: int
    kind: str
    S: tuple
    F: tuple
    parent: int | None
    children: list = field(default_factory=list)

    @property
    def sigma(self) -> tuple:
        return self.S, self.F


@dataclass(frozen=True)
class LeafEncoding:
    """Linear description of the durations consistent with a leaf.

    ``E @ d <= b`` (rows flagged ``strict`` must hold strictly when ties are
    possible) characterises the completion order, and ``e @ d + e0`` is the
    makespan, i.e. the completion time of task ``witness``.
    """

    E: np.ndarray
    b: np.ndarray
    strict: np.ndarray
    e: np.ndarray
    e0: float
    witness: int
    completion: dict  # task -> (coefficient vector, constant)


def count_states(n: int, m: int) -> tuple[int, int]:
    """Number of scheduler nodes and of leaves of the full tree for (n, m)."""
    if not n > m >= 2:
        raise InvalidInputError(f"need n > m >= 2, got n={n}, m={m}")
    total = sum(Fraction(m ** i, math.factorial(n - m - i + 1)) for i in range(1, n - m))
    decisions = 1 + Fraction(math.factorial(n), math.factorial(m)) * total
    assert decisions.denominator == 1
    leaves = math.factorial(n) * m ** (n - m)
    return int(decisions), leaves


@lru_cache(maxsize=None)
def _count_sched(u: int, r: int, idle: int) -> tuple[int, int, int]:
    k = min(idle, u)
    D, N, L = _count_adv(u - k, r + k)
    ways = math.comb(u, k)
    return 1 + ways * D, ways * N, ways * L


@lru_cache(maxsize=None)
def _count_adv(u: int, r: int) -> tuple[int, int, int]:
    if u >= 2:
        D, N, L = _count_sched(u, r - 1, 1)
        return r * D, 1 + r * N, r * L
    after = r - 1 + u
    return 0, 1, r * math.factorial(after)


def subtree_counts(n_unstarted: int, n_running: int, m: int) -> tuple[int, int, int]:
    """(scheduler, adversary, leaf) node counts of a tree rooted at a decision epoch."""
    return _count_sched(n_unstarted, n_running, m - n_running)


class ScenarioTree:
    """Materialised game tree; ``nodes[0]`` is the root scheduler node."""

    def __init__(self, n: int, m: int, tasks, running):
        self.n, self.m = n, m
        self.tasks = tuple(sorted(tasks))
        self.running = tuple(sorted(running))
        self.nodes: list[TreeNode] = []
        self._encodings: dict[int, LeafEncoding] = {}

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    def by_kind(self, kind: str) -> list[TreeNode]:
        return [v for v in self.nodes if v.kind == kind]

    @property
    def leaves(self) -> list[TreeNode]:
        return self.by_kind(LEAF)

    def path(self, node_id: int) -> list[int]:
        out = []
        while node_id is not None:
            out.append(node_id)
            node_id = self.nodes[node_id].parent
        return out[::-1]

    def find(self, S, F) -> TreeNode:
        key = (tuple(S), tuple(F))
        for v in self.nodes:
            if v.sigma == key:
                return v
        raise KeyError(key)

    def leaf_encoding(self, leaf) -> LeafEncoding:
        node = leaf if isinstance(leaf, TreeNode) else self.nodes[leaf]
        if node.kind != LEAF:
            raise InvalidInputError("leaf_encoding needs a leaf node")
        if node.id not in self._encodings:
            self._encodings[node.id] = encode_history(
                node.S, node.F, self.n, self.m, self.running)
        return self._encodings[node.id]

    def last_common_ancestor(self, a, b) -> tuple[TreeNode, frozenset]:
        """Deepest shared scheduler node of two leaves and their tie set.

        The tie set holds the completions both histories observe before
        their scheduling decisions differ.  Below the last scheduler node
        every start is forced, so two leaves that split at the final
        adversary node also share the common prefix of their completion
        orders.
        """
        a = a if isinstance(a, TreeNode) else self.nodes[a]
        b = b if isinstance(b, TreeNode) else self.nodes[b]
        if a.id == b.id:
            return a, frozenset(a.F)
        pa, pb = self.path(a.id), self.path(b.id)
        common = None
        for x, y in zip(pa, pb):
            if x != y:
                break
            common = x
        node = self.nodes[common]
        if node.kind == SCHEDULER:
            return node, frozenset(node.F)
        ties = list(node.F)
        if all(self.nodes[c].kind == LEAF for c in node.children):
            for x, y in zip(a.F[len(node.F):], b.F[len(node.F):]):
                if x != y:
                    break
                ties.append(x)
        return self.nodes[node.parent], frozenset(ties)

    def dump(self) -> str:
        """One line per node: ``<id> <kind> parent=<id|-> S=<..> F=<..>``."""
        lines = []
        for v in self.nodes:
            parent = "-" if v.parent is None else str(v.parent)
            lines.append(f"{v.id} {v.kind} parent={parent} "
                         f"S={','.join(map(str, v.S))} F={','.join(map(str, v.F))}")
        return "\n".join(lines) + "\n"


def build_tree(n: int, m: int, tasks=None, running=(), limit: int = NODE_LIMIT) -> ScenarioTree:
    """Build the complete tree for ``n`` tasks on ``m`` machines.

    ``tasks`` are the unstarted tasks at the root (default: all) and
    ``running`` is a sequence of ``(task, elapsed)`` pairs.
    """
    tasks = tuple(range(n)) if tasks is None else tuple(sorted(tasks))
    running = tuple(sorted((int(t), e) for t, e in running))
    if not 2 <= m:
        raise InvalidInputError("need m >= 2")
    if len(running) >= m:
        raise InvalidInputError("no idle machine at the root")
    if len(tasks) + len(running) > n or len(tasks) <= m - len(running):
        raise InvalidInputError("the root must offer a real scheduling decision")
    D, N, L = subtree_counts(len(tasks), len(running), m)
    if D + N + L > limit:
        full = count_states(n, m) if not running and len(tasks) == n else None
        detail = f"; full-tree counts |D|, |L| = {full}" if full else ""
        raise CapacityError(f"tree would have {D + N + L} nodes (limit {limit}){detail}")

    tree = ScenarioTree(n, m, tasks, running)
    nodes = tree.nodes

    def new(kind, S, F, parent):
        node = TreeNode(len(nodes), kind, S, F, parent)
        nodes.append(node)
        if parent is not None:
            nodes[parent].children.append(node.id)
        return node.id

    def scheduler(S, F, active, unstarted, parent, batch):
        me = new(SCHEDULER, S, F, parent)
        for chosen in itertools.combinations(unstarted, batch):
            rest = tuple(t for t in unstarted if t not in chosen)
            adversary(S + chosen, F, tuple(sorted(active + chosen)), rest, me)

    def adversary(S, F, active, unstarted, parent):
        me = new(ADVERSARY, S, F, parent)
        for f in active:
            others = tuple(t for t in active if t != f)
            if len(unstarted) >= 2:
                scheduler(S, F + (f,), others, unstarted, me, 1)
                continue
            S2 = S + unstarted
            others = tuple(sorted(others + unstarted))
            for order in itertools.permutations(others):
                new(LEAF, S2, F + (f,) + order, me)

    active = tuple(t for t, _ in running)
    scheduler(active, (), active, tasks, None, m - len(running))
    return tree


def encode_history(S, F, n: int, m: int, running=()) -> LeafEncoding:
    """Replay a complete (S, F) history into completion times that are affine in d."""
    running = tuple(sorted(running))
    comp = {}
    for t, e in running:
        vec = np.zeros(n)
        vec[t] = 1.0
        comp[t] = (vec, -float(e))
    pending = list(S[len(running):])
    active = [t for t, _ in running]
    for _ in range(m - len(running)):
        t = pending.pop(0)
        vec = np.zeros(n)
        vec[t] = 1.0
        comp[t] = (vec, 0.0)
        active.append(t)
    rows, rhs, strict = [], [], []
    for f in F:
        cf, kf = comp[f]
        for r in sorted(active):
            if r == f:
                continue
            cr, kr = comp[r]
            rows.append(cf - cr)
            rhs.append(kr - kf)
            strict.append(f > r)
        active.remove(f)
        if pending:
            t = pending.pop(0)
            vec = cf.copy()
            vec[t] += 1.0
            comp[t] = (vec, kf)
            active.append(t)
    witness = F[-1]
    E = np.array(rows, dtype=float).reshape(len(rows), n)
    return LeafEncoding(E, np.array(rhs, dtype=float), np.array(strict, dtype=bool),
                        comp[witness][0], comp[witness][1], witness, comp)
