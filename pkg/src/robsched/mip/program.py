"""Container for mixed-integer linear programs and their solutions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ..errors import InvalidInputError

RELATIONS = ("<=", "=", ">=")


@dataclass
class MipSolution:
    status: str                   # optimal | infeasible | unbounded | limit
    objective: float | None
    x: np.ndarray | None
    nodes: int = 0
    elapsed: float = 0.0
    dual_gap: float | None = None
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


class MixedIntegerProgram:
    """Linear objective, linear rows and bounded (optionally integer) variables."""

    def __init__(self, sense: str = "max"):
        if sense not in ("max", "min"):
            raise InvalidInputError("sense must be 'max' or 'min'")
        self.sense = sense
        self.names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.integer: list[bool] = []
        self.objective: dict[int, float] = {}
        self.constant = 0.0
        self.rows: list[tuple[np.ndarray, np.ndarray]] = []
        self.rels: list[str] = []
        self.rhs: list[float] = []
        self._index: dict[str, int] = {}

    @property
    def n_vars(self) -> int:
        return len(self.names)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def add_var(self, name: str, lb: float = 0.0, ub: float = math.inf,
                integer: bool = False) -> int:
        if name in self._index:
            raise InvalidInputError(f"duplicate variable name {name!r}")
        if integer and not (math.isfinite(lb) and math.isfinite(ub)):
            raise InvalidInputError(f"integer variable {name!r} needs finite bounds")
        if lb > ub:
            raise InvalidInputError(f"variable {name!r} has lb > ub")
        self._index[name] = len(self.names)
        self.names.append(name)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.integer.append(bool(integer))
        return len(self.names) - 1

    def add_binary(self, name: str) -> int:
        return self.add_var(name, 0.0, 1.0, integer=True)

    def index(self, name: str) -> int:
        return self._index[name]

    def set_objective(self, coefs: dict, constant: float = 0.0) -> None:
        self.objective = {int(k): float(v) for k, v in coefs.items() if v != 0}
        self.constant = float(constant)

    def add_constraint(self, coefs: dict, rel: str, rhs: float) -> int:
        if rel not in RELATIONS:
            raise InvalidInputError(f"unknown relation {rel!r}")
        idx = np.fromiter(coefs.keys(), dtype=np.int64, count=len(coefs))
        val = np.fromiter(coefs.values(), dtype=float, count=len(coefs))
        if len(idx) and (idx.min() < 0 or idx.max() >= self.n_vars):
            raise InvalidInputError("constraint references an undeclared variable")
        keep = val != 0
        self.rows.append((idx[keep], val[keep]))
        self.rels.append(rel)
        self.rhs.append(float(rhs))
        return len(self.rows) - 1

    # -- array views ---------------------------------------------------------

    def cost(self) -> np.ndarray:
        c = np.zeros(self.n_vars)
        for k, v in self.objective.items():
            c[k] = v
        return c

    def matrix(self) -> sparse.csr_matrix:
        indptr = [0]
        indices, data = [], []
        for idx, val in self.rows:
            indices.append(idx)
            data.append(val)
            indptr.append(indptr[-1] + len(idx))
        indices = np.concatenate(indices) if indices else np.zeros(0, np.int64)
        data = np.concatenate(data) if data else np.zeros(0)
        return sparse.csr_matrix((data, indices, np.array(indptr)),
                                 shape=(self.n_rows, self.n_vars))

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.lb, dtype=float), np.array(self.ub, dtype=float)

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        rhs = np.array(self.rhs, dtype=float)
        rels = np.array(self.rels)
        lo = np.where(rels == "<=", -np.inf, rhs)
        hi = np.where(rels == ">=", np.inf, rhs)
        return lo, hi

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.cost() @ x + self.constant)

    def violation(self, x) -> float:
        """Largest violation of any row, bound or integrality requirement."""
        x = np.asarray(x, dtype=float)
        lb, ub = self.bounds()
        worst = float(max(np.max(lb - x, initial=0.0), np.max(x - ub, initial=0.0)))
        if self.rows:
            act = self.matrix() @ x
            lo, hi = self.row_bounds()
            worst = max(worst, float(np.max(lo - act, initial=0.0)),
                        float(np.max(act - hi, initial=0.0)))
        ints = np.array(self.integer, dtype=bool)
        if ints.any():
            worst = max(worst, float(np.max(np.abs(x[ints] - np.round(x[ints])))))
        return worst

    # -- export ----------------------------------------------------------------

    def to_lp(self) -> str:
        """Text export in the widely used CPLEX-LP layout."""
        def term(v, name, first):
            sign = "-" if v < 0 else ("" if first else "+")
            return f"{sign} {abs(v):.12g} {name}".strip()

        def expr(pairs):
            parts = [term(v, self.names[k], i == 0) for i, (k, v) in enumerate(pairs)]
            return " ".join(parts) if parts else "0"

        lines = ["\\ mixed-integer program exported by robsched",
                 "Maximize" if self.sense == "max" else "Minimize"]
        obj = expr(sorted(self.objective.items()))
        if self.constant:
            obj += f" {'+' if self.constant >= 0 else '-'} {abs(self.constant):.12g}"
        lines.append(f" obj: {obj}")
        lines.append("Subject To")
        for r, ((idx, val), rel, rhs) in enumerate(zip(self.rows, self.rels, self.rhs)):
            lines.append(f" c{r}: {expr(zip(idx.tolist(), val.tolist()))} {rel} {rhs:.12g}")
        lines.append("Bounds")
        for name, lo, hi in zip(self.names, self.lb, self.ub):
            lo_s = "-inf" if lo == -math.inf else f"{lo:.12g}"
            hi_s = "+inf" if hi == math.inf else f"{hi:.12g}"
            lines.append(f" {lo_s} <= {name} <= {hi_s}")
        ints = [nm for nm, flag in zip(self.names, self.integer) if flag]
        if ints:
            lines.append("Generals")
            lines.extend(f" {nm}" for nm in ints)
        lines.append("End")
        return "\n".join(lines) + "\n"
