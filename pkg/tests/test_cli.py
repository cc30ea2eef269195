import csv

import pytest

from semiyao_kds.cli import main
from semiyao_kds.scenario import generate_scenario, serialize_scenario


@pytest.fixture
def scenario(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(serialize_scenario(generate_scenario(20, degree=2, seed=3, eps=0.2)))
    return str(path)


def rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_gen_writes_a_parsable_file(tmp_path, capsys):
    out = tmp_path / "g.txt"
    assert main(["gen", "--n", "5", "--seed", "2", "-o", str(out)]) == 0
    assert main(["construct", str(out)]) == 0
    assert "points 5" in capsys.readouterr().err


def test_construct_two_points(tmp_path):
    path = tmp_path / "two.txt"
    path.write_text("dim 2\ndegree 0\npoint 0 | 0 | 0\npoint 1 | 1 | 2\n")
    assert main(["construct", str(path), "--out-dir", str(tmp_path / "o")]) == 0
    edges = rows(tmp_path / "o" / "graph.csv")[1:]
    assert {frozenset((w, t)) for w, _, t, _ in edges} == {frozenset(("0", "1"))}
    assert rows(tmp_path / "o" / "nn.csv")[1:] == [["0", "1"], ["1", "0"]]


def test_construct_empty(tmp_path):
    path = tmp_path / "e.txt"
    path.write_text("dim 2\n")
    assert main(["construct", str(path), "--out-dir", str(tmp_path / "o")]) == 0
    assert rows(tmp_path / "o" / "graph.csv") == [["w", "l", "target", "t"]]


def test_simulate_writes_event_log(scenario, tmp_path):
    out = tmp_path / "run"
    assert main(["simulate", scenario, "--mode", "all", "--out-dir", str(out)]) == 0
    log = rows(out / "events.csv")
    assert log[0] == ["t", "kind", "cone", "axis", "id_a", "id_b", "changes_emitted"]
    assert {r[1] for r in log[1:]} <= {"u-swap", "x-swap", "tournament"}


def test_verify_good_suite_exits_zero(scenario):
    assert main(["verify", scenario, "--mode", "all", "--checkpoints", "20"]) == 0


def test_verify_fault_exits_one(scenario, capsys):
    assert main(["verify", scenario, "--inject-fault"]) == 1
    assert "DIVERGENCE: semi-yao" in capsys.readouterr().err


def test_verify_empty_scenario(tmp_path):
    path = tmp_path / "e.txt"
    path.write_text("dim 3\n")
    assert main(["verify", str(path)]) == 0


def test_parse_error_exits_two(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("dim 2\npoint 0 | 1 | x\n")
    assert main(["simulate", str(path)]) == 2
    assert "line 2, column 15" in capsys.readouterr().err


def test_usage_errors_exit_two(scenario):
    with pytest.raises(SystemExit) as err:
        main(["simulate", scenario, "--mode", "fast"])
    assert err.value.code == 2
    assert main(["simulate", scenario, "--mode", "eps-ann"]) == 0      # eps from the header
    assert main(["simulate", "/nonexistent/file"]) == 2


def test_until_and_seed_flags(scenario, tmp_path):
    for name in ("a", "b"):
        assert main(["verify", scenario, "--until", "1/2", "--checkpoints", "10", "--seed", "4",
                     "--out-dir", str(tmp_path / name)]) == 0
    assert (tmp_path / "a" / "checks.csv").read_bytes() == (tmp_path / "b" / "checks.csv").read_bytes()
