"""Performance measures over simulation records and their empirical CDFs."""
from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from ..errors import InvalidInputError

# Row names, in report order.
MEASURES = (
    "Suboptimal initial decision",
    "Promised makespan",
    "Promised makespan std",
    "Max makespan",
    "Makespan",
    "Promised to max PH",
    "Max makespan to max PH",
    "Makespan to PH",
    "Max makespan to max AR",
)
# Measures that have one value per instance (the ones plotted as ECDFs).
PER_INSTANCE = ("Promised to max PH", "Max makespan to max PH", "Makespan to PH",
                "Max makespan to max AR")


def _group(records):
    table = defaultdict(dict)
    for r in records:
        table[(r.policy, r.instance)][r.scenario] = r
    return table


def compute_measures(records, ph=None, reference: str | None = None):
    """Table of measures per policy.

    ``ph`` maps (instance, scenario) to the hindsight makespan; when omitted
    it is read from records whose policy is "ph".  ``reference`` is the
    policy used for "Suboptimal initial decision" and "Max makespan to max
    AR"; by default the adjustable policy if present, otherwise 2SSA (the
    returned ``reference`` entry says which was used).

    Returns ``(summary, per_instance)`` where ``summary[policy][measure]``
    is a number (NaN when undefined) plus a "reference" key, and
    ``per_instance[policy][measure]`` is a list ordered by instance id.
    """
    records = list(records)
    if ph is None:
        ph = {(r.instance, r.scenario): r.realized for r in records if r.policy == "ph"}
    groups = _group(records)
    policies = sorted({r.policy for r in records})
    instances = sorted({r.instance for r in records})
    if reference is None:
        reference = next((p for p in ("ar-milo", "ar-dp", "2ssa") if p in policies), None)

    def ref_cell(k):
        return groups.get((reference, k)) if reference else None

    summary, per_instance = {}, {}
    for p in policies:
        cols = defaultdict(list)
        differs = []
        for k in instances:
            cell = groups.get((p, k))
            if not cell:
                continue
            top = [v for (kk, _), v in ph.items() if kk == k]
            if not top:
                raise InvalidInputError(f"missing hindsight makespans for instance {k}")
            max_ph = max(top)
            scen = sorted(s for s in cell if s >= 0)
            promised = cell[min(cell)].promised
            cols["Promised makespan"].append(promised)
            cols["Promised to max PH"].append(promised / max_ph - 1.0)
            ref = ref_cell(k)
            if ref and p != "ph" and p != reference:
                differs.append(cell[min(cell)].first_decision != ref[min(ref)].first_decision)
            if not scen:
                continue          # promise-only record: no simulated scenarios
            try:
                phs = [ph[(k, s)] for s in scen]
            except KeyError as exc:
                raise InvalidInputError(f"missing hindsight makespan for {exc.args[0]}") from None
            real = [cell[s].realized for s in scen]
            cols["Max makespan"].append(max(real))
            cols["Makespan"].append(float(np.mean(real)))
            cols["Max makespan to max PH"].append(max(real) / max_ph - 1.0)
            cols["Makespan to PH"].append(float(np.mean([t / h for t, h in zip(real, phs)])) - 1.0)
            ref_real = [r.realized for s, r in (ref or {}).items() if s >= 0]
            if ref_real:
                cols["Max makespan to max AR"].append(max(real) / max(ref_real) - 1.0)
        row = {"reference": reference}
        for name in MEASURES:
            values = cols.get(name, [])
            if name == "Suboptimal initial decision":
                row[name] = 100.0 * float(np.mean(differs)) if differs else math.nan
            elif name == "Promised makespan std":
                pr = cols["Promised makespan"]
                row[name] = float(np.std(pr, ddof=1)) if len(pr) > 1 else math.nan
            else:
                row[name] = float(np.mean(values)) if values else math.nan
        summary[p] = row
        per_instance[p] = {name: list(cols.get(name, [])) for name in PER_INSTANCE}
    return summary, per_instance


def ecdf(values):
    """Empirical CDF points: sorted values and cumulative fractions in (0, 1]."""
    x = np.sort(np.asarray(values, dtype=float))
    y = np.arange(1, len(x) + 1) / len(x) if len(x) else np.zeros(0)
    return x, y
