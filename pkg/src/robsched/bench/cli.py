"""Command line interface: gen, solve, simulate, bounds, report.

Exit codes: 0 success, 2 invalid input, 3 capacity or iteration limit.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..bounds import BoundInputs, bound_rh_ph, bound_sa_ph, nominal_partition
from ..errors import (CapacityError, EmptySetError, InvalidInputError, LimitError,
                      UnsupportedSetError)
from ..uncertainty import BudgetedSet
from .experiment import FAMILIES, ExperimentConfig, load_config, make_instance, run_experiment
from .io import load_instance, read_results, save_instance, write_ecdf, write_measures, write_results
from .measures import compute_measures
from .simulate import POLICY_NAMES, rolling_horizon

log = logging.getLogger("robsched")


def _cmd_gen(args) -> int:
    cfg = ExperimentConfig(family=args.family, n=args.n, m=args.m, R=args.R, N=args.instances,
                           K=1, gamma=args.gamma, seed=args.seed, proportional=args.proportional)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(cfg.N):
        inst = make_instance(cfg, k)
        save_instance(out / f"{inst.label}.json", inst)
    print(f"wrote {cfg.N} instance(s) to {out}")
    return 0


def _parse_durations(text: str):
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise InvalidInputError(f"cannot read durations from {text!r}") from None


def _cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    if args.scenario:
        d = _parse_durations(args.scenario)
        rec = rolling_horizon(args.policy, inst, d)
        out = {"policy": rec.policy, "promised": rec.promised, "realized": rec.realized,
               "first_decision": list(rec.first_decision), "in_set": rec.in_set}
    elif args.policy == "ph":
        raise InvalidInputError("the hindsight policy needs --scenario")
    else:
        from .simulate import resolve_policy
        _, solve = resolve_policy(args.policy)
        dec = solve(inst, None)
        out = {"policy": args.policy, "promised": dec.value, "first_decision": list(dec.tasks)}
    print(json.dumps(out, sort_keys=True))
    return 0


def _cmd_simulate(args) -> int:
    configs = load_config(args.config)
    records = []
    for cfg in configs:
        if args.workers:
            cfg = replace(cfg, workers=args.workers)
        records.extend(run_experiment(replace(cfg, output=None)))
    out = args.out or (configs[0].output if configs else None)
    if not out:
        raise InvalidInputError("no output path: set 'output' in the config or pass --out")
    write_results(out, records)
    print(f"wrote {len(records)} record(s) to {out}")
    return 0


def _cmd_bounds(args) -> int:
    inst = load_instance(args.instance)
    U = inst.uncertainty
    if not isinstance(U, BudgetedSet):
        raise InvalidInputError("bounds need a budgeted instance")
    if inst.m != 2:
        raise InvalidInputError("bounds are stated for two machines")
    ratios = U.deviation / U.nominal
    proportional = bool(abs(ratios.max() - ratios.min()) <= 1e-9 * ratios.max())
    alpha = float(ratios.max())
    inputs = BoundInputs(tuple(float(x) for x in U.nominal), alpha, float(U.budget),
                         float(U.nominal.min()), float(U.nominal.max()))
    part = nominal_partition(U.nominal)
    out = {"bound_sa_ph": bound_sa_ph(inputs, part), "bound_rh_ph": bound_rh_ph(inputs),
           "alpha": alpha, "alpha_is_max_of_ratios": not proportional,
           "nominal_partition": [list(J) for J in part.machines]}
    print(json.dumps(out, sort_keys=True))
    return 0


def _cmd_report(args) -> int:
    records = read_results(args.results)
    summary, per_instance = compute_measures(records, reference=args.reference)
    if args.measures:
        write_measures(args.measures, summary)
    if args.ecdf:
        write_ecdf(args.ecdf, per_instance)
    if not (args.measures or args.ecdf):
        for p in sorted(summary):
            print(p, json.dumps(summary[p], sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robsched", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate instance files")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--R", type=int, help="scenarios per discrete instance")
    g.add_argument("--gamma", type=float, help="budget as a fraction of n")
    g.add_argument("--instances", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--proportional", action="store_true",
                   help="one deviation ratio per budgeted instance")
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=_cmd_gen)

    s = sub.add_parser("solve", help="solve one instance with one policy")
    s.add_argument("--instance", required=True)
    s.add_argument("--policy", choices=POLICY_NAMES, required=True)
    s.add_argument("--scenario", help="durations to simulate against, e.g. '1.5,2,0.5'")
    s.set_defaults(func=_cmd_solve)

    m = sub.add_parser("simulate", help="run an experiment config and write the results CSV")
    m.add_argument("--config", required=True)
    m.add_argument("--out")
    m.add_argument("--workers", type=int)
    m.set_defaults(func=_cmd_simulate)

    b = sub.add_parser("bounds", help="analytical bounds of a budgeted instance")
    b.add_argument("--instance", required=True)
    b.set_defaults(func=_cmd_bounds)

    r = sub.add_parser("report", help="performance measures from a results CSV")
    r.add_argument("--results", required=True)
    r.add_argument("--measures")
    r.add_argument("--ecdf")
    r.add_argument("--reference", help="policy used as the reference for decisions and max ratios")
    r.set_defaults(func=_cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CapacityError, LimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except EmptySetError as exc:
        # an out-of-set scenario can contradict everything the set allows
        print(f"error: scenario is not in the uncertainty set ({exc})", file=sys.stderr)
        return 2
    except (InvalidInputError, UnsupportedSetError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
