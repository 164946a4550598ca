"""Command-line interface: contracts, exit codes, error formats."""

import json

import numpy as np
import pytest

from greedy_widths.cli import RunConfig, build_parser, emit_plots, main
from greedy_widths.errors import ConfigError


@pytest.fixture
def set_file(tmp_path):
    pts = np.diag([(k + 1.0) ** -1 for k in range(6)])
    f = tmp_path / "set.json"
    f.write_text(json.dumps({"kind": "point_cloud",
                             "points": pts.tolist()}))
    return f


@pytest.fixture
def op_file(tmp_path):
    T = np.random.default_rng(1).normal(size=(5, 5)) / 2.0
    f = tmp_path / "T.json"
    f.write_text(json.dumps({"matrix": T.tolist()}))
    return f


def test_greedy_run_contract(tmp_path, set_file):
    out = tmp_path / "trace.json"
    code = main(["greedy", "run", "--set", str(set_file), "--p", "4",
                 "--n", "4", "--out", str(out)])
    assert code == 0
    d = json.loads(out.read_text())
    assert d["schema_version"] == "1"
    assert "build" in d
    assert d["sigmas"] == pytest.approx([1.0, 0.5, 1 / 3, 0.25], abs=1e-12)


def test_widths_csv_contract(tmp_path, op_file):
    out = tmp_path / "widths.csv"
    code = main(["widths", "--op", str(op_file), "--domain-p", "2",
                 "--target-p", "2", "--n", "0..4", "--method", "auto",
                 "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,value,kind,method"
    assert len(lines) == 6
    first = lines[1].split(",")
    assert first[2] == "exact" and first[3] == "svd"


def test_gamma_json_contract(tmp_path, op_file):
    out = tmp_path / "gamma.json"
    code = main(["gamma", "--op", str(op_file), "--n", "2",
                 "--budget", "400", "--seed", "7", "--out", str(out)])
    assert code == 0
    d = json.loads(out.read_text())
    assert set(d) >= {"n", "value", "kind", "witness_x", "witness_b",
                      "schema_version", "build"}
    assert d["n"] == 2 and d["value"] > 0


def test_bm_bound_contract(tmp_path):
    B = np.random.default_rng(2).normal(size=(6, 2))
    f = tmp_path / "V.json"
    f.write_text(json.dumps({"basis": B.tolist(), "p": 4}))
    out = tmp_path / "bm.json"
    code = main(["bm-bound", "--subspace", str(f), "--samples", "300",
                 "--seed", "3", "--out", str(out)])
    assert code == 0
    d = json.loads(out.read_text())
    assert 1.0 <= d["lambda"] <= d["sqrt_k"] * (1 + 1e-6)
    assert np.asarray(d["E"]).shape == (2, 2)


def test_verify_suite_exit_zero_and_reports(tmp_path):
    out = tmp_path / "reports"
    code = main(["verify", "--suite", "trace31", "--seed", "7",
                 "--out", str(out)])
    assert code == 0
    files = sorted(p.name for p in out.iterdir())
    assert "summary.csv" in files
    assert sum(f.endswith(".json") for f in files) == 4


def test_verify_with_config_file_and_override(tmp_path):
    cfgf = tmp_path / "run.json"
    cfgf.write_text(json.dumps({"suite": "example", "alpha": 1.0,
                                "q": 4.0, "m": 16}))
    out = tmp_path / "r"
    # CLI --m overrides the config file's m
    code = main(["verify", "--config", str(cfgf), "--m", "12",
                 "--out", str(out)])
    assert code == 0
    (rep,) = [p for p in out.iterdir() if p.suffix == ".json"]
    d = json.loads(rep.read_text())
    assert d["details"]["m"] == 12


def test_unknown_config_field_exits_2(tmp_path, capsys):
    cfgf = tmp_path / "bad.json"
    cfgf.write_text(json.dumps({"suite": "trace31", "bogus_field": 1}))
    code = main(["verify", "--config", str(cfgf), "--out",
                 str(tmp_path / "x")])
    assert code == 2
    assert "bogus_field" in capsys.readouterr().err


def test_json_errors_format(tmp_path, capsys):
    code = main(["greedy", "run", "--set", str(tmp_path / "missing.json"),
                 "--json-errors"])
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError"
    assert err["schema_version"] == "1"


def test_usage_error_exits_2():
    assert main(["verify", "--suite", "not-a-suite"]) == 2


def test_plot_empty_dir_no_output(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    out = tmp_path / "plots"
    code = main(["plot", "--reports", str(empty), "--out", str(out)])
    assert code == 0
    assert not out.exists() or not list(out.iterdir())


def test_plot_renders_svg_and_csv(tmp_path):
    reports = tmp_path / "reports"
    code = main(["verify", "--suite", "trace31", "--seed", "7",
                 "--out", str(reports)])
    assert code == 0
    plots = tmp_path / "plots"
    written = emit_plots(reports, plots)
    names = sorted(p.name for p in plots.iterdir())
    assert any(n.endswith(".svg") for n in names)
    assert any(n.endswith(".csv") for n in names)


def test_run_config_round_trip():
    cfg = RunConfig("verify", {"suite": "example", "seed": 3})
    back = RunConfig("verify", json.loads(cfg.to_json()))
    assert back.to_json() == cfg.to_json()
    with pytest.raises(ConfigError):
        RunConfig("verify", {"nonsense": True})


def test_parser_knows_all_subcommands():
    ap = build_parser()
    text = ap.format_help()
    for name in ["greedy", "widths", "gamma", "bm-bound", "verify", "plot"]:
        assert name in text
