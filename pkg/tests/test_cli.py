import json

import pytest

from fsmrepair.cli import main
from fsmrepair.serialize import parse_csv, serialize_csv


@pytest.fixture
def files(tmp_path, fig1):
    m = tmp_path / "m.csv"
    m.write_text(serialize_csv(fig1))
    assert main(["describe", str(m), "--out", str(tmp_path / "d.txt")]) == 0
    return tmp_path


def test_gen_and_parse_desc(files, capsys):
    assert main(["gen", "--states", "4", "--inputs", "2", "--seed", "3", "--out", str(files / "g.csv")]) == 0
    g = parse_csv((files / "g.csv").read_text())
    assert len(g.states) == 4
    assert main(["parse-desc", str(files / "d.txt")]) == 0
    assert capsys.readouterr().out == (files / "m.csv").read_text()


def test_diff_and_equiv(files, fig1, capsys):
    bad = files / "bad.csv"
    bad.write_text(serialize_csv(fig1.remove(("S4", "a", "1", "S1")).add(("S4", "a", "0", "S1"))))
    assert main(["diff", str(files / "m.csv"), str(bad)]) == 1
    data = json.loads(capsys.readouterr().out)
    assert data["counts"]["local_output"] == 1
    assert main(["equiv", str(files / "m.csv"), str(bad)]) == 1
    assert capsys.readouterr().out.strip() == "distinguished by: b a b a"
    assert main(["equiv", str(files / "m.csv"), str(files / "m.csv")]) == 0


def test_checkseq(files, capsys):
    assert main(["checkseq", "--in", str(files / "m.csv"), "--n", "4", "--budget-seconds", "30"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["verified"] and len(data["inputs"]) == len(data["outputs"])


def test_mutate(files, capsys):
    assert main(["mutate", str(files / "m.csv"), "--faults", "output", "--format", "dot"]) == 0
    captured = capsys.readouterr()
    assert "domain size: 256" in captured.err and captured.out.startswith("digraph")


def test_generate_and_repair(files, capsys):
    profile = files / "p.json"
    profile.write_text(json.dumps({"rates": {"local_output": 1}, "maxima": {"local_output": 1}, "min_total": 1}))
    code = main(["generate", "--desc", str(files / "d.txt"), "--backend", "sim", "--profile", str(profile)])
    assert code == 0 and capsys.readouterr().out.startswith("State,Input")
    code = main(["repair", "--strategy", "syntactic", "--desc", str(files / "d.txt"), "--oracle", str(files / "m.csv"),
                 "--backend", "sim", "--profile", str(profile), "--transcript", str(files / "t.json")])
    out = json.loads(capsys.readouterr().out)
    assert code == 0 and out["success"] and out["initially_faulty"]
    assert json.loads((files / "t.json").read_text())["history"]


def test_repair_needs_oracle_for_oracle_expert(files):
    with pytest.raises(SystemExit):
        main(["repair", "--strategy", "faultmodel", "--desc", str(files / "d.txt")])


def test_experiment(files):
    plan = files / "plan.json"
    plan.write_text(json.dumps({"sizes": [4], "oracles_per_size": 3, "num_inputs": 2, "strategy": "syntactic"}))
    assert main(["experiment", "--plan", str(plan), "--out", str(files / "r.json"), "--tables", str(files / "tab")]) == 0
    assert json.loads((files / "r.json").read_text())["summaries"][0]["oracles"] == 3
    assert (files / "tab" / "repair.csv").exists()


def test_errors_are_reported(files, capsys):
    (files / "junk.csv").write_text("nothing here\n")
    assert main(["equiv", str(files / "junk.csv"), str(files / "m.csv")]) == 2
    assert capsys.readouterr().err.startswith("error:")
