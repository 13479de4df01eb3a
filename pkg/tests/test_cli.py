import csv
import json
import pathlib

import pytest

from affinesphere.cli import main, parse_config, run
from affinesphere.geometry.errors import ConfigError


def _outputs(tmp_path, command):
    return tmp_path / f"{command}.csv", tmp_path / f"{command}.json"


def test__parse_solve_flags():
    config = parse_config(["solve", "--domain", "disk", "--grid", "129", "--out", "sol.csv"])
    assert config.command == "solve"
    assert config.domain == {"kind": "disk"}
    assert config.grid == 129
    assert config.dim == 2
    assert config.out == "sol.csv"
    assert config.report == "solve.json"
    assert config.solver.level == 129


def test__parse_verify_flags():
    config = parse_config(["verify", "--h", "2,4,8", "--seed", "42"])
    assert config.h == (2.0, 4.0, 8.0)
    assert config.seed == 42
    assert config.suite == "all"


def test__level_and_interval_dimension():
    config = parse_config(["solve", "--domain", "interval", "--level", "5"])
    assert config.grid == 33
    assert config.dim == 1
    assert parse_config(["solve", "--level", "5", "--grid", "17"]).grid == 17


@pytest.mark.parametrize(
    "argv",
    [
        ["invariants", "--builtin", "ball", "--potential-file", "ball.json"],
        ["invariants", "--builtin", "cone"],
        ["transform", "--map", "1,0,0"],
        ["solve", "--grid", "2"],
        ["invariants", "--builtin", "quadratic", "--at", "1,2,3"],
        ["invariants", "--domain", "interval", "--at", "0.1,0.2"],
        ["invariants", "--builtin", "hyperboloid", "--dim", "2", "--direction", "1"],
        ["integrate"],
        [],
    ],
)
def test__invalid_arguments(argv):
    with pytest.raises(ConfigError):
        parse_config(argv)


def test__config_file_values_are_overridden_by_flags(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"command": "solve", "grid": 33, "seed": 1, "domain": "square"}))
    config = parse_config(["solve", "--config", str(path), "--seed", "5"])
    assert config.grid == 33
    assert config.seed == 5
    assert config.domain == {"kind": "square"}


def test__malformed_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text("{grid: 33")
    with pytest.raises(ConfigError):
        parse_config(["solve", "--config", str(path)])
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        parse_config(["solve", "--config", str(path)])


def test__main_reports_usage_errors(capsys):
    assert main(["solve", "--grid", "x"]) == 2
    assert "affinesphere: error" in capsys.readouterr().err


def test__hyperboloid_conormals_at_the_vertex(tmp_path):
    out, report = _outputs(tmp_path, "invariants")
    code = main(["invariants", "--builtin", "hyperboloid", "--at", "0,0", "--out", str(out), "--report", str(report)])
    assert code == 0
    document = json.loads(report.read_text())
    assert document["sample"]["nu"] == pytest.approx([0.0, 0.0, 1.0])
    assert document["sample"]["mu"] == pytest.approx([0.0, 0.0, 1.0])
    assert document["config"]["builtin"] == "hyperboloid"
    with open(out, newline="") as fp:
        header, *rows = list(csv.reader(fp))
    assert header[:2] == ["t1", "t2"]
    assert "lambda_min" in header
    assert len(rows) == 1
    assert "-0.0" not in report.read_text()


def test__interval_solve_writes_nodes(tmp_path):
    out, report = _outputs(tmp_path, "solve")
    code = main(["solve", "--domain", "interval", "--grid", "257", "--out", str(out), "--report", str(report)])
    assert code == 0
    with open(out, newline="") as fp:
        header, *rows = list(csv.reader(fp))
    assert header == ["t1", "u", "lambda_min"]
    assert len(rows) == 255
    document = json.loads(report.read_text())
    assert document["passed"]
    assert document["criteria"]["interior_error"]
    assert not out.with_name(out.name + ".lock").exists()


def test__legendre_of_the_hyperboloid(tmp_path):
    out, report = _outputs(tmp_path, "legendre")
    argv = ["legendre", "--builtin", "hyperboloid", "--samples", "5", "--out", str(out), "--report", str(report)]
    assert main(argv) == 0
    assert json.loads(report.read_text())["rows"] == 5


def test__transform_without_a_map_is_a_usage_error(tmp_path):
    out, report = _outputs(tmp_path, "transform")
    assert run(parse_config(["transform", "--out", str(out), "--report", str(report)])) == 2


def test__locked_outputs_are_refused(tmp_path):
    out, report = _outputs(tmp_path, "invariants")
    lock = tmp_path / "invariants.csv.lock"
    lock.write_text("1")
    config = parse_config(["invariants", "--builtin", "hyperboloid", "--at", "0,0", "--out", str(out), "--report", str(report)])
    assert run(config) == 2
    assert lock.exists()
    assert not out.exists()


def test__quick_fubini_pick_verification(tmp_path):
    out, report = _outputs(tmp_path, "verify")
    argv = ["verify", "--suite", "fubini-pick", "--quick", "--out", str(out), "--report", str(report)]
    assert main(argv) == 0
    document = json.loads(report.read_text())
    assert document["reports"][0]["kind"] == "fubini-pick"
    assert all(document["criteria"].values())


@pytest.mark.parametrize("path", sorted(pathlib.Path(__file__).parent.parent.joinpath("config").glob("*.json")))
def test__example_configs_parse(path):
    command = json.loads(path.read_text())["command"]
    config = parse_config([command, "--config", str(path)])
    assert config.command == command


def test__repeated_runs_write_identical_files(tmp_path):
    contents = []
    for name in ("first", "second"):
        out, report = tmp_path / f"{name}.csv", tmp_path / f"{name}.json"
        argv = ["invariants", "--builtin", "ball", "--samples", "4", "--seed", "3", "--out", str(out), "--report", str(report)]
        assert main(argv) == 0
        config = json.loads(report.read_text())["config"]
        assert config["out"] == str(out)
        contents.append((out.read_bytes(), report.read_text().replace(name, "")))
    assert contents[0] == contents[1]


def test__wrong_dimensional_points_are_usage_errors(tmp_path, capsys):
    out, report = _outputs(tmp_path, "invariants")
    assert main(["invariants", "--builtin", "quadratic", "--at", "1,2,3", "--out", str(out), "--report", str(report)]) == 2
    assert "affinesphere: error" in capsys.readouterr().err
    spec = tmp_path / "p.json"
    spec.write_text('{"builtin": "ball", "n": 1}', encoding="utf-8")
    config = parse_config(["invariants", "--potential-file", str(spec), "--at", "0.1,0.2", "--out", str(out), "--report", str(report)])
    assert run(config) == 2
    assert not out.exists()


def test__invariants_report_hessian_and_convexity(tmp_path):
    out, report = _outputs(tmp_path, "invariants")
    argv = ["invariants", "--builtin", "ball", "--samples", "3", "--seed", "2", "--out", str(out), "--report", str(report)]
    assert main(argv) == 0
    with open(out, newline="") as fp:
        rows = list(csv.DictReader(fp))
    assert len(rows) == 3
    assert all(float(r["lambda_min"]) > 0 for r in rows)
    assert all(r["convexity_agreement"] == "true" for r in rows)
    assert json.loads(report.read_text())["criteria"] == {"convexity_agreement": True}


@pytest.mark.slow
def test__quick_verification_of_every_suite(tmp_path):
    out, report = _outputs(tmp_path, "verify")
    assert main(["verify", "--suite", "all", "--quick", "--out", str(out), "--report", str(report)]) == 0
    document = json.loads(report.read_text())
    kinds = {r["kind"] for r in document["reports"]}
    assert {"divergence", "convergence"} <= kinds
    assert document["passed"]
