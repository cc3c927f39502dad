import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robsched import BoxSet, DiscreteScenarioSet, Instance, InvalidInputError, contains
from robsched.bench import (ExperimentConfig, SimulationRecord, compute_measures, ecdf,
                            generate_budgeted_instance, generate_small_instance, rolling_horizon,
                            run_experiment, sample_scenario)
from robsched.bench.cli import main
from robsched.bench.experiment import expand, make_instance, run_instance
from robsched.bench.io import (dumps_instance, instance_from_dict, instance_to_dict,
                               load_instance, read_results, results_csv, save_instance,
                               write_results)
from robsched.errors import EmptySetError
from robsched.policies import solve_ph


# -- generators -----------------------------------------------------------------------------

def test_small_instances_are_seeded_tenths():
    a = generate_small_instance(5, "I", n=5, R=15)
    b = generate_small_instance(5, "I", n=5, R=15)
    assert a.uncertainty.scale == 10
    assert np.array_equal(a.uncertainty.units, b.uncertainty.units)
    assert a.uncertainty.units.shape == (15, 5) and a.uncertainty.units.min() >= 1
    c = generate_small_instance(6, "I", n=5, R=15)
    assert not np.array_equal(a.uncertainty.units, c.uncertainty.units)
    with pytest.raises(InvalidInputError):
        generate_small_instance(0, "III")


def test_budgeted_instances():
    inst = generate_budgeted_instance(1, 10, 3.0, proportional=True)
    U = inst.uncertainty
    assert U.budget == 3.0 and 0.5 <= U.alpha <= 1.0
    assert np.allclose(U.deviation, U.alpha * U.nominal)
    assert np.all((U.nominal >= 0.5) & (U.nominal <= 5.0))
    ratio = generate_budgeted_instance(1, 10, 3.0).uncertainty
    assert np.all((ratio.deviation / ratio.nominal >= 0.5) & (ratio.deviation / ratio.nominal <= 1.0))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 12), st.floats(0.0, 1.0))
def test_sampled_scenarios_are_members(seed, n, frac):
    inst = generate_budgeted_instance(seed, n, frac * n)
    d = sample_scenario(inst.uncertainty, seed)
    assert contains(inst.uncertainty, d)


def test_sampler_is_seeded_and_picks_discrete_rows():
    U = generate_small_instance(2, "II", n=4, R=6).uncertainty
    d = sample_scenario(U, 9)
    assert any(np.array_equal(d, row) for row in U.scenarios)
    assert np.array_equal(d, sample_scenario(U, 9))


# -- rolling horizon ------------------------------------------------------------------------

def test_rolling_static_list_on_four_task(four_task):
    for d in four_task.uncertainty.scenarios:
        rec = rolling_horizon("sl", four_task, d)
        assert rec.promised == 8.0 and rec.realized <= 8.0 and rec.in_set
        starts = [e for e in rec.trace if e[0] == "start"]
        finishes = [e for e in rec.trace if e[0] == "finish"]
        assert sum(len(e[2]) for e in starts) == 4 and len(finishes) == 4
        assert max(e[1] for e in finishes) == rec.realized


def test_rolling_first_decision_override(four_task):
    d = four_task.uncertainty.scenarios[0]
    rec = rolling_horizon("sa", four_task, d, first_decision=(2, 3))
    assert rec.first_decision == (2, 3)
    assert rec.promised == 8.5


def test_out_of_set_scenario_is_reported(four_task):
    with pytest.raises(EmptySetError):
        rolling_horizon("ar-dp", four_task, [1.0, 1.0, 1.0, 1.0])
    box = Instance(3, 2, BoxSet([1, 1, 1], [2, 2, 2]))
    rec = rolling_horizon("ph", box, [3.0, 1.0, 1.0])
    assert not rec.in_set and rec.realized == 3.0


def test_unknown_policy():
    with pytest.raises(InvalidInputError):
        rolling_horizon("fifo", generate_small_instance(0, "I", n=4, R=3), [1, 1, 1, 1])


def test_run_instance_invariants():
    cfg = ExperimentConfig("small-discrete-typeI", N=3, R=6, seed=4)
    records = run_instance(cfg, 1)
    ph = {r.scenario: r.realized for r in records if r.policy == "ph"}
    assert len(ph) == 6
    for r in records:
        assert ph[r.scenario] <= r.realized + 1e-9 <= r.promised + 2e-9


def test_budgets_share_nominal_durations():
    lo = make_instance(ExperimentConfig("large-budgeted", n=10, gamma=0.1), 3).uncertainty
    hi = make_instance(ExperimentConfig("large-budgeted", n=10, gamma=0.6), 3).uncertainty
    assert np.array_equal(lo.nominal, hi.nominal) and np.array_equal(lo.deviation, hi.deviation)
    assert lo.budget == 1.0 and hi.budget == 6.0


def test_promise_only_records():
    cfg = ExperimentConfig("large-budgeted", n=6, N=1, K=2, gamma=0.5,
                           policies=("2ssa", "sa", "ph"), rolling=("sa",))
    records = run_experiment(cfg)
    two = [r for r in records if r.policy == "2ssa"]
    assert len(two) == 1 and two[0].scenario == -1 and math.isnan(two[0].realized)
    summary, _ = compute_measures(records)
    assert not math.isnan(summary["2ssa"]["Promised to max PH"])
    assert math.isnan(summary["2ssa"]["Makespan"])


# -- measures -------------------------------------------------------------------------------

def _rec(inst, policy, s, realized, promised, first=(0, 1)):
    return SimulationRecord(inst, policy, s, realized, promised, first)


def test_measures_by_hand():
    records = [
        _rec("A", "ph", 0, 4.0, 5.0), _rec("A", "ph", 1, 5.0, 5.0),
        _rec("A", "sa", 0, 5.0, 6.0), _rec("A", "sa", 1, 5.5, 6.0),
        _rec("A", "ar-dp", 0, 4.5, 5.5, (0, 2)), _rec("A", "ar-dp", 1, 5.0, 5.5, (0, 2)),
        _rec("B", "ph", 0, 8.0, 8.0),
        _rec("B", "sa", 0, 8.0, 8.0), _rec("B", "ar-dp", 0, 8.0, 8.0),
    ]
    summary, per = compute_measures(records)
    sa = summary["sa"]
    assert sa["reference"] == "ar-dp"
    assert sa["Suboptimal initial decision"] == 50.0
    assert sa["Promised makespan"] == 7.0
    assert sa["Promised makespan std"] == pytest.approx(math.sqrt(2))
    assert sa["Max makespan"] == 6.75
    assert sa["Makespan"] == pytest.approx((5.25 + 8.0) / 2)
    assert sa["Promised to max PH"] == pytest.approx(0.1)
    assert sa["Max makespan to max PH"] == pytest.approx(0.05)
    assert sa["Makespan to PH"] == pytest.approx(0.175 / 2)
    assert sa["Max makespan to max AR"] == pytest.approx(0.05)
    assert per["sa"]["Promised to max PH"] == pytest.approx([0.2, 0.0])
    assert math.isnan(summary["ar-dp"]["Suboptimal initial decision"])


def test_measures_need_hindsight():
    with pytest.raises(InvalidInputError):
        compute_measures([_rec("A", "sa", 0, 5.0, 6.0)])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=40))
def test_ecdf_is_a_distribution(values):
    x, y = ecdf(values)
    assert np.all(np.diff(x) >= 0) and np.all(np.diff(y) > 0)
    assert y[-1] == 1.0 and y[0] == pytest.approx(1 / len(values))


# -- files ----------------------------------------------------------------------------------

@pytest.mark.parametrize("inst", [
    generate_small_instance(3, "II", n=5, R=4, label="d"),
    generate_budgeted_instance(3, 7, 2.1, proportional=True, label="p"),
    generate_budgeted_instance(3, 7, 2.1, label="b"),
    Instance(3, 2, BoxSet([0.1, 0.2, 1 / 3], [1.0, 2.0, 3.0]), label="x"),
])
def test_instance_files_round_trip(tmp_path, inst):
    path = tmp_path / "inst.json"
    save_instance(path, inst)
    back = load_instance(path)
    assert dumps_instance(back) == path.read_text()
    for key, value in inst.uncertainty.to_dict().items():
        assert np.array_equal(np.asarray(value), np.asarray(back.uncertainty.to_dict()[key]))


def test_instance_file_errors(tmp_path):
    doc = instance_to_dict(generate_small_instance(0, "I", n=4, R=3))
    with pytest.raises(InvalidInputError):
        instance_from_dict({**doc, "version": 99})
    with pytest.raises(InvalidInputError):
        instance_from_dict({k: v for k, v in doc.items() if k != "set_payload"})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InvalidInputError):
        load_instance(bad)


def test_results_round_trip(tmp_path):
    records = [_rec("A", "sa", 0, 5.0, 6.0), _rec("A", "2ssa", -1, math.nan, 1 / 3, (1, 4))]
    path = tmp_path / "r.csv"
    write_results(path, records)
    back = read_results(path)
    assert back[0] == records[0]
    assert back[1].promised == 1 / 3 and math.isnan(back[1].realized)
    assert back[1].first_decision == (1, 4)
    assert results_csv(back) == path.read_text()


def test_config_validation_and_sweeps():
    with pytest.raises(InvalidInputError):
        ExperimentConfig("medium")
    with pytest.raises(InvalidInputError):
        ExperimentConfig("large-budgeted", gamma=1.5)
    with pytest.raises(InvalidInputError):
        ExperimentConfig.from_dict({"family": "large-budgeted", "colour": 1})
    with pytest.raises(InvalidInputError):
        ExperimentConfig("small-discrete-typeI", policies=("sa", "magic"))
    cfgs = expand({"family": "large-budgeted", "n": [10, 15], "gamma": [0.1, 0.2, 0.3]})
    assert [(c.n, c.gamma) for c in cfgs][:4] == [(10, 0.1), (10, 0.2), (10, 0.3), (15, 0.1)]
    assert ExperimentConfig("small-discrete-typeII").N == 500


# -- command line ---------------------------------------------------------------------------

def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_cli_round_trip(tmp_path, capsys):
    out = tmp_path / "inst"
    assert main(["gen", "--family", "large-budgeted", "--n", "6", "--gamma", "0.5",
                 "--instances", "2", "--proportional", "--out", str(out)]) == 0
    capsys.readouterr()
    path = out / "B-n6-g0.5-0000.json"
    assert path.exists()
    assert main(["solve", "--instance", str(path), "--policy", "sa"]) == 0
    solved = _json_out(capsys)
    assert len(solved["first_decision"]) == 2
    U = load_instance(path).uncertainty
    scen = ",".join(repr(float(x)) for x in U.nominal)
    assert main(["solve", "--instance", str(path), "--policy", "2ssa", "--scenario", scen]) == 0
    run = _json_out(capsys)
    assert run["in_set"] and run["realized"] <= run["promised"] + 1e-9
    assert main(["bounds", "--instance", str(path)]) == 0
    bounds = _json_out(capsys)
    assert bounds["bound_sa_ph"] >= 1.0 and not bounds["alpha_is_max_of_ratios"]


def test_cli_simulate_and_report(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"family": "small-discrete-typeI", "N": 2, "R": 4,
                               "output": str(tmp_path / "r.csv")}))
    assert main(["simulate", "--config", str(cfg)]) == 0
    assert main(["report", "--results", str(tmp_path / "r.csv"),
                 "--measures", str(tmp_path / "m.csv"), "--ecdf", str(tmp_path / "e.csv")]) == 0
    header = (tmp_path / "m.csv").read_text().splitlines()[0]
    assert header == "measure,policy,value,reference"
    assert (tmp_path / "e.csv").read_text().startswith("measure,policy,x,y")


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["solve", "--instance", str(tmp_path / "missing.json"), "--policy", "sa"]) == 2
    big = tmp_path / "big"
    main(["gen", "--family", "small-discrete-typeI", "--n", "9", "--R", "3", "--out", str(big)])
    assert main(["solve", "--instance", str(big / "I-n9-0000.json"), "--policy", "sl"]) == 3
    disc = big / "I-n9-0000.json"
    assert main(["bounds", "--instance", str(disc)]) == 2
    assert main(["solve", "--instance", str(disc), "--policy", "ph"]) == 2
    # no scenario of the discrete set has these durations
    nine = ",".join(["9"] * 9)
    assert main(["solve", "--instance", str(disc), "--policy", "sa", "--scenario", nine]) == 2
    with pytest.raises(SystemExit):
        main(["solve", "--policy", "sa"])
