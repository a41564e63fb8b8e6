import csv
import json

import numpy as np
import pytest

from duopolytax.cli import run
from duopolytax.config import apply_overrides, parse_value, scenario_from_config, scenario_to_config
from duopolytax.model import Proportional, SystemKind, ValidationError

from conftest import FIXTURES


def load(name):
    return json.loads((FIXTURES / name).read_text())


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if code == 0 and out else None), err


@pytest.mark.parametrize("name", sorted(p.name for p in FIXTURES.glob("*.json")))
def test_fixture_round_trip(name):
    s = scenario_from_config(load(name))
    assert scenario_from_config(scenario_to_config(s)) == s


def test_taxed_fixture_contents():
    s = scenario_from_config(load("taxed_benchmark.json"))
    assert s.system is SystemKind.TAXED and s.tax == Proportional(0.1)


def test_unknown_key_rejected():
    data = load("symmetric_notax.json")
    data["firm1"]["colour"] = "red"
    with pytest.raises(ValidationError, match="unknown key firm1.colour"):
        scenario_from_config(data)


def test_missing_key_rejected():
    data = load("symmetric_notax.json")
    del data["horizon"]
    with pytest.raises(ValidationError, match="missing key"):
        scenario_from_config(data)


def test_overrides_copy_and_parse():
    data = load("symmetric_notax.json")
    out = apply_overrides(data, ["horizon=20", "tax.kind=proportional", "tax.x=0.25"])
    assert out["horizon"] == 20 and out["tax"] == {"kind": "proportional", "x": 0.25}
    assert "tax" not in data or data["tax"] != out["tax"]
    assert parse_value("coupled") == "coupled" and parse_value("true") is True


def test_simulate_writes_trajectory(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    code, report, _ = invoke(capsys, "simulate", "--config", str(FIXTURES / "symmetric_notax.json"),
                             "--out", str(out))
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["t", "V1", "V2"]
    assert rows[0, 0] == 0.0 and rows[-1, 0] == 10.0
    np.testing.assert_array_equal(rows[:, 1], rows[:, 2])
    assert report["results"]["mode"] == "coupled"
    assert report["command"]["name"] == "simulate" and report["tool"] == "duopolytax"


def test_simulate_is_byte_deterministic(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        invoke(capsys, "simulate", "--config", str(FIXTURES / "asymmetric_taxed.json"), "--out", str(p))
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_simulate_decoupled_mode(tmp_path, capsys):
    code, report, _ = invoke(capsys, "simulate", "--config", str(FIXTURES / "asymmetric_taxed.json"),
                             "--mode", "decoupled", "--out", str(tmp_path / "t.csv"))
    assert code == 0 and report["results"]["mode"] == "decoupled"


def test_lv_equilibrium_run(tmp_path, capsys):
    out = tmp_path / "lv.csv"
    code, report, _ = invoke(capsys, "analyze-lv", "--config", str(FIXTURES / "lv_equilibrium.json"),
                             "--out", str(out))
    assert code == 0
    assert report["results"]["period"] == "at equilibrium"
    _, rows = read_csv(out)
    assert np.all(rows[:, 1:] == 1.0)


def test_lv_oscillation_run(capsys):
    code, report, _ = invoke(capsys, "analyze-lv", "--config", str(FIXTURES / "lv_oscillation.json"))
    res = report["results"]
    assert code == 0
    assert res["period"] == pytest.approx(2 * np.pi, rel=0.01)
    assert res["first_integral_drift"] < 1e-6
    np.testing.assert_allclose(res["averages"], [1.0, 1.0], rtol=1e-4)


def test_lv_short_horizon_is_analysis_failure(capsys):
    code, _, err = invoke(capsys, "analyze-lv", "--config", str(FIXTURES / "lv_oscillation.json"),
                          "--set", "horizon=3")
    assert code == 4 and "horizon" in err


def test_compromise_run(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code, report, _ = invoke(capsys, "compromise", "--config", str(FIXTURES / "taxed_benchmark.json"),
                             "--out", str(out))
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["x", "h1", "h2", "h3", "maxdev"] and len(rows) == 101
    res = report["results"]
    assert res["max_deviation"] <= rows[:, 4].min() + 1e-12
    assert 0.0 < res["x_star"] < 0.5


def test_compromise_grid_refinement(tmp_path, capsys):
    xs = []
    for n in ("101", "201"):
        _, report, _ = invoke(capsys, "compromise", "--config", str(FIXTURES / "taxed_benchmark.json"),
                              "--grid", n, "--out", str(tmp_path / f"{n}.csv"))
        xs.append(report["results"]["x_star"])
    assert abs(xs[0] - xs[1]) < 0.02


def test_compromise_without_state(tmp_path, capsys):
    _, report, _ = invoke(capsys, "compromise", "--config", str(FIXTURES / "taxed_benchmark.json"),
                          "--grid", "21", "--no-state", "--out", str(tmp_path / "c.csv"))
    assert report["results"]["x_star"] == 0.0


def test_sweep_run(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, report, _ = invoke(capsys, "sweep", "--config", str(FIXTURES / "asymmetric_taxed.json"),
                             "--param", "x", "--from", "0", "--to", "0.9", "--steps", "10",
                             "--out", str(out))
    assert code == 0 and report["results"]["rows"] == 10
    header, rows = read_csv(out)
    assert header == ["x", "h1", "h2", "h3", "total"]
    assert np.all(np.diff(rows[:, 1]) <= 0) and np.all(np.diff(rows[:, 2]) <= 0)


def test_sweep_single_step(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = invoke(capsys, "sweep", "--config", str(FIXTURES / "asymmetric_taxed.json"),
                        "--from", "0.3", "--to", "0.3", "--steps", "1", "--out", str(out))
    _, rows = read_csv(out)
    assert code == 0 and rows.shape == (1, 5) and rows[0, 0] == 0.3


def test_report_file_option(tmp_path, capsys):
    rep = tmp_path / "r.json"
    code = run(["simulate", "--config", str(FIXTURES / "symmetric_notax.json"),
                "--out", str(tmp_path / "t.csv"), "--report", str(rep)])
    assert code == 0 and capsys.readouterr().out == ""
    assert json.loads(rep.read_text())["scenario"]["horizon"] == 10.0


@pytest.mark.parametrize(
    "argv, code",
    [
        (["simulate", "--config", "taxed_benchmark.json", "--set", "tax.x=1.0"], 2),
        (["simulate", "--config", "symmetric_notax.json", "--set", "firm1.kappa=-1"], 2),
        (["simulate", "--config", "symmetric_notax.json", "--set", "bogus=1"], 2),
        (["sweep", "--config", "taxed_benchmark.json", "--from", "0.5", "--to", "0.2",
          "--steps", "3"], 2),
        (["simulate", "--config", "missing.json"], 5),
    ],
)
def test_exit_codes(tmp_path, capsys, argv, code):
    argv = [str(FIXTURES / a) if a.endswith(".json") else a for a in argv]
    assert run(argv + ["--out", str(tmp_path / "o.csv")]) == code
    assert capsys.readouterr().err


def test_invalid_json_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["simulate", "--config", str(bad)]) == 6


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["simulate"])
    assert exc.value.code == 64


def test_validation_message_names_problem(tmp_path, capsys):
    run(["simulate", "--config", str(FIXTURES / "taxed_benchmark.json"), "--set", "tax.x=1.0",
         "--out", str(tmp_path / "o.csv")])
    assert "x out of [0,1)" in capsys.readouterr().err
