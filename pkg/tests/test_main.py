import json
import os

import pandas as pd

from main import EXIT_INVALID, EXIT_OK, main, parse_arguments


def test_parse_arguments():
    args = parse_arguments(["mc-orthogonality", "--dims", "10", "20", "--samples", "100", "--jobs", "2"])
    assert args.command == "mc-orthogonality"
    assert args.dims == [10, 20]
    assert args.samples == 100
    assert args.jobs == 2
    assert parse_arguments(["run", "--config", "x.json"]).config == "x.json"


def test_init_writes_default_configs(tmp_path):
    config_dir = tmp_path / "config"
    assert main(["--init", "--config-dir", str(config_dir)]) == EXIT_OK
    assert sorted(os.listdir(config_dir)) == [
        "experiment_edney1.json", "experiment_edney6.json", "experiment_oblique.json"]


def test_missing_command(tmp_path):
    assert main(["--config-dir", str(tmp_path)]) == EXIT_INVALID


def test_validate_detached_configuration(tmp_path):
    path = tmp_path / "detached.json"
    path.write_text(json.dumps({"case": "oblique", "mach": 2.5, "theta_deg": 40.0}), encoding="utf-8")
    code = main(["--config-dir", str(tmp_path), "validate", "--config", str(path), "--out", str(tmp_path / "out")])
    assert code == EXIT_INVALID


def test_validate_bad_config_value(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"case": "oblique", "mach": 0.5}), encoding="utf-8")
    assert main(["--config-dir", str(tmp_path), "validate", "--config", str(path)]) == EXIT_INVALID


def test_validate_edney6(tmp_path):
    path = tmp_path / "edney6.json"
    path.write_text(json.dumps({"case": "edney6", "mach": 3.5, "alpha1_deg": 15.0, "alpha2_deg": 25.0}),
                    encoding="utf-8")
    out = tmp_path / "out"
    assert main(["--config-dir", str(tmp_path), "validate", "--config", str(path), "--out", str(out)]) == EXIT_OK
    with open(out / "analytic_reference.json", encoding="utf-8") as file:
        summary = json.load(file)
    assert summary["parameters"]["reflected_wave"] == "expansion"


def test_mc_orthogonality_command(tmp_path):
    out = tmp_path / "mc"
    code = main(["--config-dir", str(tmp_path), "mc-orthogonality", "--dims", "50", "500",
                 "--deltas", "0.1", "0.2", "--samples", "20000", "--seed", "7", "--out", str(out)])
    assert code == EXIT_OK
    table = pd.read_csv(out / "mc_orthogonality.csv")
    assert len(table) == 4
    assert table["within_3sigma"].all()


def test_run_and_report_commands(tmp_path, small_config):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(small_config.to_dict()), encoding="utf-8")
    args = ["--config-dir", str(tmp_path)]
    assert main(args + ["run", "--config", str(path)]) == EXIT_OK
    assert main(args + ["report", "--config", str(path)]) == EXIT_OK
    assert os.path.exists(os.path.join(small_config.output_dir, "summary.json"))
