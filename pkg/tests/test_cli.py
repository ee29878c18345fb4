"""Config-driven runner: schema validation, outputs, exit codes, determinism."""

import json

import numpy as np
import pytest

from spatialzeno.cli import (
    EXIT_COMPUTE,
    EXIT_CONFIG_PARSE,
    EXIT_SCHEMA,
    main,
    version_and_capabilities,
)


def write_config(tmp_path, name, config):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return str(path)


def base_probability_config(**overrides):
    config = {
        "schema_version": "1",
        "experiment": "probability",
        "d": 1,
        "psi": {"catalog": "uniform"},
        "phi": {"catalog": "uniform"},
        "grid": {"kind": "uniform"},
        "n": 10,
    }
    config.update(overrides)
    return config


def test_probability_run_writes_outputs(tmp_path, capsys):
    cfg = write_config(tmp_path, "p.json", base_probability_config(
        output={"stem": "prob"}))
    code = main(["--output-dir", str(tmp_path), "run", cfg])
    out = capsys.readouterr().out
    assert code == 0
    assert "p_y1=0.1" in out
    csv_text = (tmp_path / "prob.csv").read_text()
    assert csv_text.startswith("# schema_version=1 config_hash=")
    row = csv_text.splitlines()[2].split(",")
    assert float(row[2]) == pytest.approx(0.1, abs=1e-15)
    payload = json.loads((tmp_path / "prob.json").read_text())
    assert payload["result"]["p_y1"] == pytest.approx(0.1, abs=1e-15)
    assert payload["config_hash"]


def test_convergence_run_has_rows_and_rate(tmp_path, capsys):
    config = {
        "schema_version": "1",
        "experiment": "convergence",
        "d": 1,
        "psi": {"catalog": "sine_mode", "k": 1},
        "phi": {"catalog": "sine_mode", "k": 1},
        "grid": {"kind": "uniform"},
        "n_list": [2 ** k for k in range(1, 11)],
        "output": {"stem": "conv"},
    }
    cfg = write_config(tmp_path, "c.json", config)
    assert main(["--output-dir", str(tmp_path), "run", cfg]) == 0
    lines = (tmp_path / "conv.csv").read_text().splitlines()
    assert lines[1] == "n,num_bins,p_y1,error_bound,scaled_p"
    assert len(lines) == 12  # hash comment + header + 10 rows
    payload = json.loads((tmp_path / "conv.json").read_text())
    assert payload["result"]["fitted_rate"] == pytest.approx(1.0, abs=0.1)


def test_missing_phi_exits_3_and_names_field(tmp_path, capsys):
    config = base_probability_config()
    del config["phi"]
    cfg = write_config(tmp_path, "bad.json", config)
    assert main(["run", cfg]) == EXIT_SCHEMA
    err = json.loads(capsys.readouterr().out)
    assert err["error"]["kind"] == "schema-violation"
    assert err["error"]["field"] == "phi"


def test_unknown_field_rejected(tmp_path, capsys):
    cfg = write_config(tmp_path, "bad.json",
                       base_probability_config(extra_knob=3))
    assert main(["run", cfg]) == EXIT_SCHEMA


def test_unparsable_config_exits_2(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["run", str(path)]) == EXIT_CONFIG_PARSE
    err = json.loads(capsys.readouterr().out)
    assert err["error"]["kind"] == "config-parse"


def test_missing_file_exits_2(tmp_path, capsys):
    assert main(["run", str(tmp_path / "absent.json")]) == EXIT_CONFIG_PARSE


def test_compute_failure_exits_4(tmp_path, capsys):
    # schema-valid but semantically impossible: 3 cells at n=2 with C=1.2
    config = base_probability_config(
        grid={"kind": "jittered", "C": 1.2, "seed": 0, "cells_per_axis": 3},
        n=2)
    cfg = write_config(tmp_path, "bad.json", config)
    assert main(["run", cfg]) == EXIT_COMPUTE
    err = json.loads(capsys.readouterr().out)
    assert err["error"]["kind"] == "compute-failure"


def test_validate_subcommand(tmp_path, capsys):
    good = write_config(tmp_path, "good.json", base_probability_config())
    assert main(["validate", good]) == 0
    bad = write_config(tmp_path, "bad.json", base_probability_config(n=0))
    assert main(["validate", bad]) == EXIT_SCHEMA


def test_capabilities_report():
    report = version_and_capabilities()
    assert "power_singular" in report["catalog"]
    assert report["schema_version"] == "1"
    a = json.dumps(version_and_capabilities(), sort_keys=True)
    b = json.dumps(version_and_capabilities(), sort_keys=True)
    assert a == b


def test_capabilities_stdout_byte_identical(capsys):
    main(["capabilities"])
    first = capsys.readouterr().out
    main(["capabilities"])
    second = capsys.readouterr().out
    assert first == second


def test_identical_config_reproduces_outputs_byte_for_byte(tmp_path):
    config = {
        "schema_version": "1",
        "experiment": "sample",
        "d": 1,
        "psi": {"catalog": "sine_mode", "k": 1},
        "phi": {"catalog": "sine_mode", "k": 1},
        "grid": {"kind": "jittered", "C": 2.0, "seed": 5},
        "n": 16,
        "count": 2000,
        "seed": 77,
    }
    cfg = write_config(tmp_path, "s.json", config)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(["--output-dir", str(out_a), "run", cfg]) == 0
    assert main(["--output-dir", str(out_b), "run", cfg]) == 0
    assert (out_a / "sample.csv").read_bytes() == (out_b / "sample.csv").read_bytes()
    assert (out_a / "sample.json").read_bytes() == (out_b / "sample.json").read_bytes()


def test_joint_experiment_table(tmp_path):
    config = {
        "schema_version": "1",
        "experiment": "joint",
        "d": 1,
        "psi": {"catalog": "uniform"},
        "phi": {"catalog": "uniform"},
        "grid": {"kind": "uniform"},
        "n": 2,
        "output": {"stem": "joint", "format": "csv"},
    }
    cfg = write_config(tmp_path, "j.json", config)
    assert main(["--output-dir", str(tmp_path), "run", cfg]) == 0
    lines = (tmp_path / "joint.csv").read_text().splitlines()
    assert not (tmp_path / "joint.json").exists()
    rows = [l.split(",") for l in lines[2:]]
    assert len(rows) == 2
    for row in rows:
        assert float(row[1]) == pytest.approx(0.25, abs=1e-15)
        assert float(row[2]) == pytest.approx(0.25, abs=1e-15)


def test_discretize_experiment(tmp_path, capsys):
    config = {
        "schema_version": "1",
        "experiment": "discretize",
        "d": 1,
        "psi": {"catalog": "sine_mode", "k": 1},
        "grid": {"kind": "uniform"},
        "n": 2,
        "output": {"stem": "disc"},
    }
    cfg = write_config(tmp_path, "d.json", config)
    assert main(["--output-dir", str(tmp_path), "run", cfg]) == 0
    lines = (tmp_path / "disc.csv").read_text().splitlines()
    assert lines[1] == "bin,average_re,average_im,volume"
    avg = float(lines[2].split(",")[1])
    assert avg == pytest.approx(2.0 * np.sqrt(2.0) / np.pi, abs=1e-12)


def test_rd_study_experiment(tmp_path):
    config = {
        "schema_version": "1",
        "experiment": "rd_study",
        "d": 1,
        "psi": {"catalog": "gaussian", "mu": 0.0, "sigma": 1.0},
        "phi": {"catalog": "gaussian", "mu": 0.0, "sigma": 1.0},
        "grid": {"kind": "uniform"},
        "n_list": [4, 8, 16, 32],
        "mass_target": 0.9999999,
        "output": {"stem": "rd", "format": "json"},
    }
    cfg = write_config(tmp_path, "rd.json", config)
    assert main(["--output-dir", str(tmp_path), "run", cfg]) == 0
    payload = json.loads((tmp_path / "rd.json").read_text())
    assert payload["tail_budget"]["tail_bound"] <= 1e-7
    assert payload["result"]["fitted_rate"] == pytest.approx(1.0, abs=0.1)


def test_density_config(tmp_path, capsys):
    config = {
        "schema_version": "1",
        "experiment": "probability",
        "d": 1,
        "density": {"terms": [
            {"weight": 0.5, "state": {"catalog": "sine_mode", "k": 1}},
            {"weight": 0.5, "state": {"catalog": "sine_mode", "k": 2}},
        ]},
        "phi": {"catalog": "sine_mode", "k": 1},
        "grid": {"kind": "uniform"},
        "n": 1,
    }
    cfg = write_config(tmp_path, "rho.json", config)
    assert main(["--output-dir", str(tmp_path), "run", cfg]) == 0
    assert "p_y1=0.5" in capsys.readouterr().out


def test_superpose_config_nests(tmp_path):
    config = base_probability_config(psi={
        "catalog": "superpose",
        "terms": [
            {"coeff": [0.8, 0.0], "state": {"catalog": "sine_mode", "k": 1}},
            {"coeff": [0.0, 0.6], "state": {
                "catalog": "superpose",
                "terms": [{"coeff": [1.0, 0.0],
                           "state": {"catalog": "sine_mode", "k": 2}}]}},
        ]})
    cfg = write_config(tmp_path, "sup.json", config)
    assert main(["--output-dir", str(tmp_path), "run", cfg]) == 0


def test_psi_and_density_mutually_exclusive(tmp_path):
    config = base_probability_config(density={"terms": [
        {"weight": 1.0, "state": {"catalog": "uniform"}}]})
    cfg = write_config(tmp_path, "both.json", config)
    assert main(["run", cfg]) == EXIT_SCHEMA
