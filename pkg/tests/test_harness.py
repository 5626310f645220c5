import json

import pytest

from fsmrepair.harness import (
    ExperimentPlan,
    ExperimentReport,
    emit_report,
    oracle_seed,
    run_experiment,
    table_fault_model,
    table_faults,
    table_repair,
)

SMALL = dict(sizes=[4, 6], oracles_per_size=6, num_inputs=3, seed=11)
FORCED = {"rates": {"missing_transition": 0.6, "local_output": 0.6}, "maxima": {"missing_transition": 2,
          "local_output": 2}, "min_total": 1}


def test_deterministic_reports():
    plan = ExperimentPlan(strategy="syntactic", profile=FORCED, **SMALL)
    a, b = run_experiment(plan).to_json(), run_experiment(ExperimentPlan(strategy="syntactic", profile=FORCED, **SMALL)).to_json()
    assert a == b
    other = run_experiment(ExperimentPlan(strategy="syntactic", profile=FORCED, **{**SMALL, "seed": 12})).to_json()
    assert other != a


def test_json_round_trip(tmp_path):
    report = run_experiment(ExperimentPlan(**SMALL))
    assert ExperimentReport.from_json(report.to_json()) == report
    (path,) = emit_report(report, tmp_path / "r.json")
    assert json.loads(path.read_text())["plan"]["seed"] == 11


def test_accounting():
    report = run_experiment(ExperimentPlan(strategy="syntactic", profile=FORCED, **SMALL))
    for s in report.summaries:
        recs = [r for r in report.records if r["size"] == s["size"]]
        assert s["faulty"] == sum(r["faulty"] for r in recs) == s["oracles"]
        assert s["avg_delta"] == pytest.approx(sum(r["delta"] for r in recs) / len(recs))
        assert 0 <= s["repair_success_rate"] <= 100
        assert s["repair_success_rate"] == 100.0


def test_perfect_backend_finds_nothing():
    report = run_experiment(ExperimentPlan(backend="perfect", strategy="syntactic", **SMALL))
    for s in report.summaries:
        assert s["faulty"] == 0 and s["avg_delta"] == 0 and s["repair_success_rate"] == 100.0


def test_fault_model_tables(tmp_path):
    plan = ExperimentPlan(strategy="faultmodel", profile=FORCED, **SMALL)
    report = run_experiment(plan)
    written = emit_report(report, tmp_path / "tables", "csv")
    assert sorted(p.name for p in written) == ["fault_model.csv", "faults.csv", "repair.csv"]
    assert table_fault_model(report).startswith("nb states,4,6\n")
    assert table_faults(report).splitlines()[0] == "nb of states,Type 1,Type 2,Type 3,Type 4,All"
    assert "100%" in table_repair(report)


def test_repair_size_limit():
    report = run_experiment(ExperimentPlan(strategy="syntactic", profile=FORCED, repair_max_states=4, **SMALL))
    by_size = {s["size"]: s for s in report.summaries}
    assert "repair_success_rate" in by_size[4] and "repair_success_rate" not in by_size[6]


def test_plan_validation(tmp_path):
    with pytest.raises(ValueError):
        ExperimentPlan(oracles_per_size=0)
    with pytest.raises(ValueError):
        ExperimentPlan(backend="oracle")
    with pytest.raises(ValueError):
        ExperimentPlan(strategy="magic")
    path = tmp_path / "plan.json"
    path.write_text(json.dumps({"sizes": [3], "oracles_per_size": 2}))
    assert ExperimentPlan.load(path).sizes == [3]
    with pytest.raises(ValueError):
        emit_report(run_experiment(ExperimentPlan.load(path)), tmp_path / "x", "xml")


def test_empty_size_list():
    report = run_experiment(ExperimentPlan(sizes=[]))
    assert report.summaries == [] and report.records == []


def test_oracle_seeds_distinct():
    seeds = {oracle_seed(s, n, i) for s in range(3) for n in (5, 10) for i in range(30)}
    assert len(seeds) == 3 * 2 * 30
