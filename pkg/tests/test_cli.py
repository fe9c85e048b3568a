"""Тесты командной строки: вывод команд, файл параметров и коды завершения."""

from json import dumps, loads

import pytest

import main
from commands import rate
from config import Config
from hexwalk.errors import NumericalFailureError

ASYMMETRIC = ["--q0", "1/2,1/4,1/4", "--q1", "1/5,3/10,1/2"]


@pytest.fixture(autouse=True)
def work_dir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_dist_at_zero(capsys):
    assert main.run(["dist", "--n", "0"]) == main.EXIT_OK
    assert capsys.readouterr().out == "j,k,p\n0,0,1\n"


def test_dist_engines_agree(capsys):
    assert main.run(["dist", "--n", "6"] + ASYMMETRIC) == main.EXIT_OK
    exact = capsys.readouterr().out
    assert main.run(["dist", "--n", "6", "--engine", "closed-form"] + ASYMMETRIC) == main.EXIT_OK
    assert capsys.readouterr().out == exact


def test_dist_json_and_heatmap(capsys):
    assert main.run(["dist", "--n", "2", "--uniform", "--format", "json", "--heatmap"]) == main.EXIT_OK
    captured = capsys.readouterr()
    payload = loads(captured.out)
    assert payload["n"] == 2
    assert payload["mode"] == "rational"
    assert captured.err.startswith("k\\j")


def test_dist_csv_is_decimal_unless_rational_requested(capsys):
    assert main.run(["dist", "--n", "1", "--uniform"]) == main.EXIT_OK
    assert capsys.readouterr().out.splitlines()[1] == "-1,0,0.33333333333333331"
    assert main.run(["dist", "--n", "1", "--uniform", "--arithmetic", "rational"]) == main.EXIT_OK
    assert capsys.readouterr().out.splitlines()[1] == "-1,0,1/3"


def test_dist_float_arithmetic(capsys):
    assert main.run(["dist", "--n", "1", "--q0", "0.5,0.25,0.25", "--q1", "0.5,0.25,0.25"]) == main.EXIT_OK
    assert capsys.readouterr().out == "j,k,p\n-1,0,0.25\n-1,1,0.25\n0,0,0.5\n"


def test_moments(capsys):
    assert main.run(["moments", "--n", "10", "--uniform"]) == main.EXIT_OK
    payload = loads(capsys.readouterr().out)
    assert payload["variance"] == pytest.approx([5.0, 5.0])
    assert payload["mean"] == pytest.approx([0.0, 0.0], abs=1e-12)


def test_sample_is_deterministic(capsys):
    arguments = ["sample", "--n", "30", "--replicas", "5", "--seed", "42"] + ASYMMETRIC
    assert main.run(arguments) == main.EXIT_OK
    first = capsys.readouterr().out
    assert main.run(arguments) == main.EXIT_OK
    assert capsys.readouterr().out == first
    assert first.splitlines()[0] == "replica,x,y"
    assert len(first.splitlines()) == 6


def test_sample_zero_steps(capsys):
    assert main.run(["sample", "--n", "0", "--replicas", "2", "--seed", "1"]) == main.EXIT_OK
    assert capsys.readouterr().out == "replica,x,y\n0,0,0\n1,0,0\n"


def test_sample_paths(capsys):
    assert main.run(["sample", "--n", "3", "--replicas", "2", "--paths"]) == main.EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "replica,t,x,y"
    assert lines[1] == "0,0,0,0"
    assert len(lines) == 1 + 2 * 4


def test_rate_moderate_point(capsys):
    assert main.run(["rate", "--mode", "moderate", "--point", "1", "1", "--uniform"]) == main.EXIT_OK
    assert loads(capsys.readouterr().out)["value"] == pytest.approx(2.0, abs=1e-12)


def test_rate_large_at_mean(capsys):
    assert main.run(["rate", "--point", "0", "0", "--uniform"]) == main.EXIT_OK
    payload = loads(capsys.readouterr().out)
    assert payload["finite"] is True
    assert payload["value"] == pytest.approx(0.0, abs=1e-12)


def test_rate_grid(capsys):
    assert main.run(["rate", "--grid", "0:0.5:2,0:0:1", "--uniform"]) == main.EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "x,y,rate,finite"
    assert len(lines) == 3
    assert all(line.endswith(",true") for line in lines[1:])


def test_rate_requires_point_or_grid(capsys):
    assert main.run(["rate", "--uniform"]) == main.EXIT_BAD_CONFIG


def test_rate_numerical_failure(capsys, monkeypatch):
    def failing(x, y, q):
        raise NumericalFailureError("line search stalled", last_iterate=(0.0, 0.0))

    monkeypatch.setattr(rate, "legendre", failing)
    assert main.run(["rate", "--point", "0.1", "0", "--uniform", "--lang", "en"]) == main.EXIT_NUMERICAL_FAILURE
    assert "line search stalled" in capsys.readouterr().err


def test_validate_symmetry(capsys):
    assert main.run(["validate", "--suite", "symmetry", "--m", "4"]) == main.EXIT_OK
    payload = loads(capsys.readouterr().out)
    assert payload["passed"] is True
    assert payload["suites"]["symmetry"]["max_violation"] == 0


def test_validate_unknown_suite(capsys):
    assert main.run(["validate", "--suite", "everything"]) == main.EXIT_BAD_CONFIG


def test_bad_row_sum(capsys):
    code = main.run(["dist", "--n", "2", "--q0", "0.5,0.3,0.1", "--q1", "0.5,0.3,0.2"])
    assert code == main.EXIT_BAD_CONFIG
    assert "row 0" in capsys.readouterr().err


def test_exact_engine_cap(capsys):
    assert main.run(["dist", "--n", "20000"]) == main.EXIT_BAD_CONFIG


def test_run_file(work_dir, capsys):
    run_file = work_dir / "run.json"
    run_file.write_text(dumps({"n": 3, "uniform": True, "format": "json"}), encoding="utf-8")
    assert main.run(["dist", "--config", str(run_file), "--n", "0"]) == main.EXIT_OK
    assert loads(capsys.readouterr().out)["n"] == 0


def test_run_file_unknown_key(work_dir, capsys):
    run_file = work_dir / "run.json"
    run_file.write_text(dumps({"n": 3, "colour": "red"}), encoding="utf-8")
    assert main.run(["dist", "--config", str(run_file)]) == main.EXIT_BAD_CONFIG
    assert "colour" in capsys.readouterr().err


def test_out_file(work_dir, capsys):
    target = work_dir / "dist.csv"
    assert main.run(["dist", "--n", "0", "--out", str(target), "--lang", "en"]) == main.EXIT_OK
    captured = capsys.readouterr()
    assert captured.out == ""
    assert str(target) in captured.err
    assert target.read_text(encoding="utf-8") == "j,k,p\n0,0,1\n"


def test_closed_form_engine_cap(capsys, monkeypatch):
    monkeypatch.setattr(Config, "engine_max_steps", 10)
    assert main.run(["dist", "--n", "12", "--uniform", "--engine", "closed-form"]) == main.EXIT_BAD_CONFIG
    assert main.run(["dist", "--n", "10", "--uniform", "--engine", "closed-form"]) == main.EXIT_OK


@pytest.mark.parametrize("content", [
    {"q0": 5, "q1": 5},
    {"grid": 5},
    {"point": 1},
    {"point": [1, 2, 3]},
    {"n": [1]},
    {"seed": "seven"},
    {"engine": 1},
    {"lang": "de"},
    [1, 2],
])
def test_run_file_wrong_types(work_dir, capsys, content):
    run_file = work_dir / "run.json"
    run_file.write_text(dumps(content), encoding="utf-8")
    assert main.run(["rate", "--config", str(run_file)]) == main.EXIT_BAD_CONFIG
