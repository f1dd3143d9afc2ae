import json

import pytest

from wiserd.cli_report import RunConfig, emit_plot_data, main, parse_plot_data, run
from wiserd.errors import ConfigError


def test_build_ball_radius_zero(capsys):
    assert main(["build-ball", "--radius", "0"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["vertices"]) == 1 and data["edges"] == []


def test_build_ball_csv(capsys):
    assert main(["build-ball", "--radius", "2", "--format", "csv"]) == 0
    rows = parse_plot_data(capsys.readouterr().out)
    assert [r["ball"] for r in rows] == [1, 11, 83]


def test_link_audit_exit_zero(capsys):
    assert main(["link-audit"]) == 0
    v = json.loads(capsys.readouterr().out)["verdicts"]
    assert all(x["status"] == "pass" for x in v.values())


def test_config_errors(capsys):
    assert main(["build-ball", "--radius", "-1"]) == 2
    assert main(["envelope", "--format", "xml", "a"]) == 2
    assert main(["envelope", "a", "b", "c"]) == 2
    assert main(["triangle-reduce", "x1"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_resource_limit_exit(monkeypatch, capsys):
    monkeypatch.setenv("WISERD_MAX_VERTICES", "5")
    assert main(["build-ball", "--radius", "2"]) == 3
    monkeypatch.setenv("WISERD_MAX_VERTICES", "many")
    assert main(["build-ball", "--radius", "2"]) == 2


def test_rd_scan_rows(capsys):
    assert main(["rd-scan", "--rmax", "5", "--format", "csv"]) == 0
    rows = parse_plot_data(capsys.readouterr().out)
    assert len(rows) == 5
    assert all(r["lower_bound"] <= r["power_bound"] <= r["young_ceiling"] for r in rows)


def test_envelope_and_triangle(capsys):
    assert main(["envelope", "sas"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["bands_met"] >= 1 and d["vertices"] > 0
    assert main(["triangle-reduce", "--saturated", "aaaaaaaa", "cccc"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["outcome"] == "ResidualTriangle" and d["saturated_witness"]


def test_plot_data_roundtrip():
    table = [{"r": 1, "max_count": 4, "fit": 2.5}, {"r": 2, "max_count": 16, "fit": 2.5}]
    assert parse_plot_data(emit_plot_data(table)) == table
    with pytest.raises(ConfigError):
        emit_plot_data([])


def test_validation_before_work():
    with pytest.raises(ConfigError):
        RunConfig("report", radius=-2).validate()
    assert run(RunConfig("report", samples=-1)) == 2


def test_digest_ignores_output_path():
    a = RunConfig("report", out="x.json")
    b = RunConfig("report", out="y.json")
    assert a.digest() == b.digest()
    assert a.digest() != RunConfig("report", seed=1).digest()
