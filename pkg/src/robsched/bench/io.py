"""Instance files (versioned JSON text) and the results / measures CSV files."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from ..errors import InvalidInputError
from ..model import Instance
from ..uncertainty import BoxSet, BudgetedSet, DiscreteScenarioSet
from .simulate import SimulationRecord

INSTANCE_VERSION = 1
RESULT_FIELDS = ("instance", "policy", "scenario", "promised", "realized", "first_decision",
                 "solve_ms")


def _dec(values):
    return [repr(float(x)) for x in values]


def instance_to_dict(inst: Instance) -> dict:
    U = inst.uncertainty
    if isinstance(U, DiscreteScenarioSet):
        payload = {"scale": U.scale, "units": U.units.tolist()}
    elif isinstance(U, BudgetedSet):
        payload = {"nominal": _dec(U.nominal), "deviation": _dec(U.deviation),
                   "budget": repr(float(U.budget))}
        if U.alpha is not None:
            payload["alpha"] = repr(float(U.alpha))
    elif isinstance(U, BoxSet):
        payload = {"lower": _dec(U.lower), "upper": _dec(U.upper)}
    else:
        raise InvalidInputError(f"cannot serialise {type(U).__name__}")
    return {"version": INSTANCE_VERSION, "n": inst.n, "m": inst.m, "set_kind": U.kind,
            "set_payload": payload, "label": inst.label, "seed": inst.seed}


def instance_from_dict(doc: dict) -> Instance:
    if doc.get("version") != INSTANCE_VERSION:
        raise InvalidInputError(f"unsupported instance file version {doc.get('version')!r}")
    try:
        kind, p = doc["set_kind"], doc["set_payload"]
        if kind == "discrete":
            U = DiscreteScenarioSet.from_units(p["units"], int(p["scale"]))
        elif kind == "budgeted":
            alpha = float(p["alpha"]) if "alpha" in p else None
            U = BudgetedSet([float(x) for x in p["nominal"]], [float(x) for x in p["deviation"]],
                            float(p["budget"]), alpha=alpha)
        elif kind == "box":
            U = BoxSet([float(x) for x in p["lower"]], [float(x) for x in p["upper"]])
        else:
            raise InvalidInputError(f"unknown set kind {kind!r}")
        return Instance(int(doc["n"]), int(doc["m"]), U, doc.get("label", ""), doc.get("seed"))
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed instance document: {exc}") from None


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1, sort_keys=True) + "\n"


def save_instance(path, inst: Instance) -> None:
    Path(path).write_text(dumps_instance(inst))


def load_instance(path) -> Instance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: not a JSON document ({exc})") from None
    return instance_from_dict(doc)


def _num(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def results_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_FIELDS)
    for r in records:
        w.writerow([r.instance, r.policy, r.scenario, _num(r.promised), _num(r.realized),
                    " ".join(str(t) for t in r.first_decision), _num(r.solve_ms)])
    return buf.getvalue()


def write_results(path, records) -> None:
    Path(path).write_text(results_csv(records))


def read_results(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and set(rows[0]) != set(RESULT_FIELDS):
        raise InvalidInputError(f"{path}: unexpected columns {sorted(rows[0])}")
    out = []
    for row in rows:
        fd = tuple(int(t) for t in row["first_decision"].split())
        out.append(SimulationRecord(row["instance"], row["policy"], int(row["scenario"]),
                                    _parse(row["realized"]), _parse(row["promised"]), fd,
                                    solve_ms=float(row["solve_ms"]) if row["solve_ms"] else None))
    return out


def _parse(text: str) -> float:
    return float(text) if text else math.nan


def write_measures(path, summary) -> None:
    from .measures import MEASURES
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["measure", "policy", "value", "reference"])
        for p in sorted(summary):
            for name in MEASURES:
                w.writerow([name, p, _num(summary[p][name]), summary[p]["reference"] or ""])


def write_ecdf(path, per_instance) -> None:
    from .measures import ecdf
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["measure", "policy", "x", "y"])
        for p in sorted(per_instance):
            for name, values in per_instance[p].items():
                x, y = ecdf(values)
                for a, b in zip(x, y):
                    w.writerow([name, p, _num(a), _num(b)])
