"""Experiment configuration and the (optionally parallel) deterministic runner."""
from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ..errors import InvalidInputError
from ..policies import solve_ph
from .generate import generate_budgeted_instance, generate_small_instance, sample_scenario
from .simulate import POLICIES, SimulationRecord, rolling_horizon, resolve_policy

FAMILIES = ("small-discrete-typeI", "small-discrete-typeII", "large-budgeted")
_DEFAULTS = {
    "small-discrete-typeI": dict(n=5, R=15, N=500, policies=("ar-dp", "2ssa", "sl", "sa", "ph")),
    "small-discrete-typeII": dict(n=5, R=15, N=500, policies=("ar-dp", "2ssa", "sl", "sa", "ph")),
    "large-budgeted": dict(n=10, N=50, K=50, gamma=0.3, policies=("2ssa", "sa", "ph")),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment cell.  ``gamma`` is the budget as a fraction of n (budgeted family)."""

    family: str
    n: int | None = None
    m: int = 2
    R: int | None = None
    N: int | None = None
    K: int | None = None
    gamma: float | None = None
    seed: int = 0
    policies: tuple = ()
    output: str | None = None
    workers: int = 1
    timing: bool = False
    proportional: bool = False
    rolling: tuple = field(default=None)   # policies simulated in rolling horizon (default: all)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidInputError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        defaults = _DEFAULTS[self.family]
        for key, value in defaults.items():
            if getattr(self, key) in (None, ()):
                object.__setattr__(self, key, value)
        object.__setattr__(self, "policies", tuple(self.policies))
        if self.rolling is not None:
            object.__setattr__(self, "rolling", tuple(self.rolling))
        for p in self.policies:
            if p != "ph" and p not in POLICIES:
                resolve_policy(p)
        counts = [self.n, self.m, self.N, self.workers] + \
            ([self.R] if self.discrete else [self.K])
        if any(c is None or int(c) < 1 for c in counts):
            raise InvalidInputError("n, m, N, R/K and workers must be positive")
        if not self.discrete and not 0 <= self.gamma <= 1:
            raise InvalidInputError("gamma is a fraction of n in [0, 1]")

    @property
    def discrete(self) -> bool:
        return self.family != "large-budgeted"

    @property
    def budget(self) -> float:
        return round(self.gamma * self.n, 12)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        return asdict(self)


def expand(doc: dict) -> list:
    """Configs from a document whose ``n`` and ``gamma`` may be lists (cartesian sweep)."""
    ns = doc.get("n") if isinstance(doc.get("n"), list) else [doc.get("n")]
    gs = doc.get("gamma") if isinstance(doc.get("gamma"), list) else [doc.get("gamma")]
    return [ExperimentConfig.from_dict({**doc, "n": n, "gamma": g}) for n in ns for g in gs]


def load_config(path) -> list:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: not a JSON document ({exc})") from None
    docs = doc if isinstance(doc, list) else [doc]
    return [c for d in docs for c in expand(d)]


def instance_id(config: ExperimentConfig, k: int) -> str:
    if config.discrete:
        kind = "I" if config.family.endswith("typeI") else "II"
        return f"{kind}-n{config.n}-{k:04d}"
    return f"B-n{config.n}-g{config.gamma:g}-{k:04d}"


def make_instance(config: ExperimentConfig, k: int):
    """Instance k.  Budgeted instances share d0 and dbar across budgets (same seed stream)."""
    label = instance_id(config, k)
    seed = np.random.SeedSequence([config.seed, config.n, k])
    rng = np.random.default_rng(seed)
    if config.discrete:
        kind = "I" if config.family.endswith("typeI") else "II"
        return generate_small_instance(rng, kind, config.n, config.R, config.m, label=label)
    return generate_budgeted_instance(rng, config.n, config.budget, config.m,
                                      proportional=config.proportional, label=label)


def scenarios_for(config: ExperimentConfig, inst, k: int) -> list:
    if config.discrete:
        return [row.copy() for row in inst.uncertainty.scenarios]
    return [sample_scenario(inst.uncertainty,
                            np.random.default_rng(np.random.SeedSequence([config.seed, config.n, k, s])))
            for s in range(config.K)]


def run_instance(config: ExperimentConfig, k: int) -> list:
    """All records of instance k: every policy on every evaluation scenario."""
    inst = make_instance(config, k)
    label = inst.label
    scen = scenarios_for(config, inst, k)
    hindsight = [solve_ph(d, inst.m) for d in scen]
    ph = [float(v) for _, v in hindsight]
    out = []
    rolling = config.policies if config.rolling is None else config.rolling
    for p in config.policies:
        if p == "ph":
            top = max(ph)
            for s, (part, _) in enumerate(hindsight):
                first = tuple(sorted(min(J) for J in part.machines if J))
                out.append(SimulationRecord(label, "ph", s, ph[s], top, first))
            continue
        _, solve = resolve_policy(p)
        tic = time.perf_counter()
        root = solve(inst, None)
        root_ms = 1000.0 * (time.perf_counter() - tic)
        if p not in rolling:
            out.append(SimulationRecord(label, p, -1, float("nan"), float(root.value),
                                        tuple(sorted(root.tasks)),
                                        solve_ms=root_ms if config.timing else None))
            continue
        for s, d in enumerate(scen):
            rec = rolling_horizon(p, inst, d, root=root, scenario=s, instance_id=label,
                                  timing=config.timing)
            if config.timing:
                rec = replace(rec, solve_ms=rec.solve_ms + (root_ms if s == 0 else 0.0))
            out.append(replace(rec, trace=()))
    return out


def _run(args):
    config, k = args
    return run_instance(config, k)


def run_experiment(config: ExperimentConfig) -> list:
    """Records for all instances, sorted by (instance, policy order, scenario).

    With ``workers > 1`` instances are farmed out to processes; every
    instance derives its own seeds, so the output does not depend on the
    number of workers.
    """
    jobs = [(config, k) for k in range(config.N)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(_run, jobs))
    else:
        chunks = [_run(j) for j in jobs]
    order = {p: i for i, p in enumerate(config.policies)}
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=lambda r: (r.instance, order[r.policy], r.scenario))
    if config.output:
        from .io import write_results
        write_results(config.output, records)
    return records
