import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

from handover_mpc import config, simlog
from handover_mpc.cli import main
from handover_mpc.errors import ParseError, ValidationError


def test_minimal_file_gets_defaults(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text("name: tiny\n", encoding="utf-8")
    bundle = config.load_scenario(p)
    assert bundle.scenario.name == "tiny"
    assert bundle.ocp.horizon == 10
    assert bundle.sync.dphi_max > 0
    assert bundle.gp.noise_var == pytest.approx(1e-4)


def test_bundled_names_resolve():
    for name in ("nominal", "pause", "retreat"):
        bundle = config.load_scenario(name)
        assert bundle.scenario.name == name


def test_negative_noise_variance_names_field(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("gp:\n  noise_var: -1.0e-4\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="noise_variance"):
        config.load_scenario(p)


def test_parse_error_on_bad_yaml(tmp_path):
    p = tmp_path / "broken.yaml"
    p.write_text("hand: [unclosed\n", encoding="utf-8")
    with pytest.raises(ParseError):
        config.load_scenario(p)
    with pytest.raises(ParseError):
        config.load_scenario(tmp_path / "missing.yaml")


def test_round_trip_serialization(tmp_path):
    bundle = config.load_scenario("nominal")
    out = tmp_path / "echo.yaml"
    config.dump_scenario(bundle, out)
    again = config.load_scenario(out)
    assert config.bundle_to_dict(again) == config.bundle_to_dict(bundle)


def test_validation_rejects_bad_vectors(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("q0: [1, 2, 3]\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="q0"):
        config.load_scenario(p)


def test_write_log_contract(tmp_path, nominal_log):
    csv_path = simlog.write_log(nominal_log, tmp_path)
    text = csv_path.read_text(encoding="utf-8").splitlines()
    assert text[0] == simlog.CSV_HEADER
    assert len(text) == len(nominal_log.rows) + 1
    data, statuses = simlog.read_log_csv(csv_path)
    # numeric round trip at 12 significant digits
    for i, row in enumerate(nominal_log.rows):
        vals, status, _ = row.csv_values()
        for a, b in zip(vals, data[i]):
            assert b == pytest.approx(a, rel=1e-11, abs=1e-300)
        assert statuses[i] == status
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["scenario"] == "nominal"
    assert meta["seed"] == 7
    assert "config" in meta and "versions" in meta
    assert len(meta["solve_ms_per_step"]) == len(nominal_log.rows)


def test_write_log_byte_identical(tmp_path, nominal_log):
    p1 = simlog.write_log(nominal_log, tmp_path / "a")
    p2 = simlog.write_log(nominal_log, tmp_path / "b")
    assert p1.read_bytes() == p2.read_bytes()


def test_write_log_rejects_empty(tmp_path):
    with pytest.raises(ValidationError):
        simlog.write_log(simlog.SimLog(rows=[], meta={}), tmp_path)


def test_phi_series_helper(tmp_path, nominal_log):
    csv_path = simlog.write_log(nominal_log, tmp_path)
    t, phi_c, phi_h, phi_ho = simlog.phi_series(csv_path)
    assert len(t) == len(nominal_log.rows)
    assert phi_c[0] == pytest.approx(0.0)
    # the three progress curves converge by the end of the run
    assert abs(phi_c[-1] - phi_ho[-1]) < 0.01
    assert abs(phi_h[-1] - phi_ho[-1]) < 0.01


@pytest.fixture(scope="module")
def short_scenario(tmp_path_factory):
    raw = yaml.safe_load(
        config.bundled_scenario_path("nominal").read_text(encoding="utf-8")
    )
    raw["duration"] = 0.5
    raw["training"]["n_trajectories"] = 4
    p = tmp_path_factory.mktemp("cli") / "short.yaml"
    p.write_text(yaml.safe_dump(raw), encoding="utf-8")
    return p


def test_cli_train_gp(short_scenario, tmp_path):
    rc = main(["train-gp", "--scenario", str(short_scenario), "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "gp_dataset.csv").exists()
    info = json.loads((tmp_path / "gp_model.json").read_text())
    assert info["n_samples"] == 4 * 17
    assert len(info["log_marginal_likelihood"]) == 3


def test_cli_run_writes_log(short_scenario, tmp_path):
    rc = main(["run", "--scenario", str(short_scenario), "--out", str(tmp_path)])
    assert rc == 2  # 0.5 s cap: no grasp, flagged timeout
    data, statuses = simlog.read_log_csv(tmp_path / "log.csv")
    assert statuses[-1] == "timeout"
    assert data.shape[0] == 6  # 5 steps + initial row


def test_cli_seed_override(short_scenario, tmp_path):
    main(["train-gp", "--scenario", str(short_scenario), "--seed", "99", "--out", str(tmp_path)])
    info = json.loads((tmp_path / "gp_model.json").read_text())
    assert info["seed"] == 99


def test_cli_module_entry_point(short_scenario, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "handover_mpc.cli", "--version"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
