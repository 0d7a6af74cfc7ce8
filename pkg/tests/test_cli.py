import csv
import io

import pytest

from gambling_games.cli import HEADERS, main, run_command


def run(argv, tmp_path=None):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def table(text):
    return list(csv.reader(io.StringIO(text)))


def test_check_counterexample_structure_exits_zero():
    code, out, err = run(["check", "--builder", "counterexample",
                          "--props", "leavable,nonexpansive"])
    assert code == 0
    rows = table(out)
    assert rows[0] == HEADERS["check"]
    assert {r[2] for r in rows[1:]} == {"pass"}


def test_failed_check_exits_one():
    code, out, _ = run(["check", "--builder", "circle6", "--props", "excessive",
                        "--lambdas", "0.1,0.01"])
    assert code == 1
    assert table(out)[1][:3] == ["excessive", "", "fail"]


def test_lacunary_scan_oscillates():
    code, out, _ = run(["counterexample", "--variant", "lacunary", "--scan-depth", "8"])
    assert code == 0
    rows = table(out)
    assert rows[0] == HEADERS["scan"]
    body = [[float(v) for v in r] for r in rows[1:]]
    assert len(body) == 8
    for n, lh, xh, ll, xl, gap in body[4:]:
        assert xh >= 0.48 and xl <= 0.46 and gap >= 0.02


def test_counterexample_rows_have_fixed_columns():
    code, out, _ = run(["counterexample", "--variant", "two-point", "--lambdas", "1e-4,1e-8"])
    rows = table(out)
    assert code == 0 and rows[0] == HEADERS["counterexample"]
    assert len(rows) == 3 and all(len(r) == len(rows[0]) for r in rows)


def test_limit_report_on_circle6():
    code, out, err = run(["limit", "--builder", "circle6", "--method", "sweep"])
    assert code == 0
    lines = {l.split()[0]: l.split()[1] for l in err.splitlines()
             if l.split() and l.split()[0] in ("balanced", "excessive", "depressive")}
    assert lines == {"balanced": "pass", "excessive": "fail", "depressive": "fail"}
    assert table(out)[0] == HEADERS["limit"]


def test_strict_limit_exits_one_when_rejected():
    code, _, _ = run(["limit", "--builder", "circle6", "--lambdas", "0.1,0.01", "--strict"])
    assert code == 1


def test_values_file_round_trip(tmp_path):
    values = tmp_path / "v.csv"
    code, _, _ = run(["solve", "--builder", "mdp3 grid=8 depth=2", "--lambda", "1e-4",
                      "--csv", str(values)])
    assert code == 0
    code, out, _ = run(["check", "--builder", "mdp3 grid=8 depth=2",
                        "--props", "balanced", "--values", str(values), "--check-tol", "1e-3"])
    assert code == 0


def test_scenario_file_and_report_file(tmp_path):
    sc = tmp_path / "s.txt"
    sc.write_text("[states X]\na b\n[house X]\na: 1 0 ; 0 1\nb: 0 1\n[payoff]\n0\n1\n")
    rep = tmp_path / "r.txt"
    code, out, err = run(["solve", str(sc), "--lambda", "0.5", "--report", str(rep)])
    assert code == 0 and err == ""
    assert "discounted value" in rep.read_text()
    rows = table(out)
    assert rows[1] == ["a", "*", "0.5"] and rows[2] == ["b", "*", "1.0"]


@pytest.mark.parametrize("cmd", [
    ["sweep", "--builder", "circle6", "--lambdas", "0.5,0.1"],
    ["nstage", "--builder", "mdp3", "--n", "3", "--all"],
    ["reach", "--builder", "mdp3", "--state", "a"],
    ["potential", "--builder", "mdp3", "--mode", "strong"],
    ["simulate", "--builder", "splitting N=5", "--sigma", "adapted", "--tau", "uniform-random",
     "--n", "30", "--trials", "4", "--seed", "9", "--x1", "0.5", "--y1", "0.25"],
    ["variation", "--builder", "splitting", "--state", "0.5", "--horizon", "20"],
])
def test_commands_are_deterministic_with_fixed_headers(cmd):
    a, b = run(cmd), run(cmd)
    assert a[0] == 0
    assert a[1] == b[1]
    rows = table(a[1])
    assert rows[0] == HEADERS[cmd[0]]
    assert len(rows) > 1 and all(len(r) == len(rows[0]) for r in rows)


def test_missing_potential_exits_one():
    code, out, err = run(["potential", "--builder", "weakcycle", "--mode", "strong"])
    assert code == 1
    assert "no strong potential found" in err


@pytest.mark.parametrize("argv", [
    ["solve", "--builder", "mdp3", "--lambda", "1.5"],
    ["solve", "--builder", "nosuch", "--lambda", "0.5"],
    ["solve", "--lambda", "0.5"],
    ["check", "--builder", "mdp3", "--props", "shiny"],
    ["sweep", "--builder", "mdp3", "--lambdas", "0.1,x"],
    ["solve", "/nonexistent/file", "--lambda", "0.5"],
    ["solve", "--builder", "mdp3"],
])
def test_input_errors_exit_two(argv):
    assert run(argv)[0] == 2


def test_numerical_failure_exits_three(tmp_path):
    sc = tmp_path / "s.txt"
    sc.write_text("builder circle6\n[solver]\nmax_iter = 1\n")
    code, out, err = run(["limit", str(sc), "--method", "mz-iteration"])
    assert code == 3
    assert "numerical failure" in err and out == ""


def test_main_exits_with_code():
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--builder", "mdp3", "--lambda", "2"])
    assert exc.value.code == 2
