import copy
import json
from pathlib import Path

import pytest
import yaml

from qlb import cli, pipeline
from qlb.errors import ConfigurationError
from qlb.pipeline import (
    STAGES,
    emit,
    load_config,
    load_report,
    paper_defaults_path,
    read_spr_points,
    run_report,
    run_stage,
)

DATA_DIR = paper_defaults_path().parent


def write_config(tmp_path, mutate=None):
    """Copy the bundled config with absolute data paths, optionally mutated."""
    raw = yaml.safe_load(paper_defaults_path().read_text())
    for label in raw["treatments"]:
        pf = raw["treatments"][label].get("points_file")
        if pf:
            raw["treatments"][label]["points_file"] = str(DATA_DIR / pf)
    raw["tls"]["points_file"] = str(DATA_DIR / raw["tls"]["points_file"])
    raw["xps"]["spectrum_file"] = str(DATA_DIR / raw["xps"]["spectrum_file"])
    raw["kinetics"]["points_file"] = str(DATA_DIR / raw["kinetics"]["points_file"])
    if mutate:
        mutate(raw)
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(raw))
    return path


class TestConfigLoading:
    def test_bundled_defaults_load(self):
        cfg = load_config(paper_defaults_path())
        assert cfg.participation.r_ma.value == pytest.approx(0.105)
        assert set(cfg.treatments) == {"hf", "hf_90_days", "untreated"}
        assert "participation.r_ma" in cfg.derived_flags
        assert len(cfg.config_sha256) == 64

    def test_unknown_top_level_key(self, tmp_path):
        path = write_config(tmp_path, lambda raw: raw.update(surprise=1))
        with pytest.raises(ConfigurationError, match="surprise"):
            load_config(path)

    def test_unknown_nested_key(self, tmp_path):
        path = write_config(
            tmp_path, lambda raw: raw["participation"].update(bogus=2)
        )
        with pytest.raises(ConfigurationError, match="bogus"):
            load_config(path)

    def test_missing_section(self, tmp_path):
        path = write_config(tmp_path, lambda raw: raw.pop("qubit"))
        with pytest.raises(ConfigurationError, match="qubit"):
            load_config(path)

    def test_missing_data_file(self, tmp_path):
        path = write_config(
            tmp_path,
            lambda raw: raw["tls"].update(points_file="/nonexistent.csv"),
        )
        with pytest.raises(ConfigurationError, match="not found"):
            load_config(path)

    def test_bad_number(self, tmp_path):
        path = write_config(
            tmp_path, lambda raw: raw["qubit"].update(c_shunt_fF="wide")
        )
        with pytest.raises(ConfigurationError):
            load_config(path)

    def test_nonexistent_config(self):
        with pytest.raises(ConfigurationError):
            load_config("/no/such/config.yaml")


def test_read_spr_points_converts_q_to_inv_q(tmp_path):
    path = tmp_path / "points.csv"
    path.write_text(
        "treatment,p_ms,q_tls0,sigma_q\nhf,1e-4,2e6,1e5\n"
    )
    pts = read_spr_points(path)["hf"]
    assert pts[0].inv_q.value == pytest.approx(5e-7)
    assert pts[0].inv_q.sigma == pytest.approx(1e5 / 4e12)


@pytest.fixture(scope="module")
def config(tmp_path_factory):
    return load_config(write_config(tmp_path_factory.mktemp("cfg")))


@pytest.fixture(scope="module")
def report(config):
    return run_report(config)


class TestStages:
    def test_unknown_stage(self, config):
        with pytest.raises(ConfigurationError):
            run_stage("mystery", config)

    @pytest.mark.parametrize("stage", STAGES)
    def test_each_stage_produces_a_fragment(self, config, stage):
        frag = run_stage(stage, config)
        assert frag["stages"], f"{stage} produced no output"

    def test_report_runs_all_stages(self, config):
        report = run_report(config)
        assert report["schema_version"] == 1
        assert report["skipped"] == []
        assert set(report["stages"]) == {
            "tls_fit", "spr_fit", "budget", "qubit", "xps_fit", "kinetics"
        }
        prov = report["provenance"]
        assert prov["config_sha256"] == config.config_sha256
        assert "participation.r_ma" in prov["derived_ratio_flags"]

    def test_unconfigured_stages_skipped(self, tmp_path):
        path = write_config(tmp_path, lambda raw: raw.pop("kinetics"))
        report = run_report(load_config(path))
        assert "kinetics" in [s["stage"] for s in report["skipped"]]
        assert "kinetics" not in report["stages"]


class TestEmission:
    def test_json_round_trip(self, report, tmp_path):
        (path,) = emit(report, tmp_path, fmt="json")
        assert path.name == "report.json"
        assert load_report(path) == json.loads(json.dumps(report))

    def test_plot_csv_tables(self, report, tmp_path):
        written = emit(report, tmp_path, fmt="plot-csv")
        names = {p.name for p in written}
        assert names == {"spr_fit.csv", "kinetics_fit.csv", "budget.csv"}
        spr = (tmp_path / "spr_fit.csv").read_text().splitlines()
        assert spr[0] == "treatment,kind,p_ms,inv_q,sigma,fit"
        kinds = {line.split(",")[1] for line in spr[1:]}
        assert kinds == {"point", "line"}

    def test_unknown_format(self, report, tmp_path):
        with pytest.raises(ConfigurationError):
            emit(report, tmp_path, fmt="pdf")


class TestCli:
    def test_report_success(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        rc = cli.main(["--config", str(cfg), "--out", str(tmp_path / "out"),
                       "report"])
        assert rc == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["skipped"] == []
        assert (tmp_path / "out" / "report.json").is_file()

    def test_single_stage(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        rc = cli.main(["--config", str(cfg), "--out", str(tmp_path / "out"),
                       "budget"])
        assert rc == 0
        report = load_report(tmp_path / "out" / "report.json")
        assert list(report["stages"]) == ["budget"]

    def test_bad_config_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("surprise: 1\n")
        rc = cli.main(["--config", str(bad), "--out", str(tmp_path / "out"),
                       "report"])
        assert rc == 2

    def test_unconfigured_single_stage_is_dataset_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, lambda raw: raw.pop("kinetics"))
        rc = cli.main(["--config", str(cfg), "--out", str(tmp_path / "out"),
                       "kinetics"])
        assert rc == 3

    def test_env_var_config(self, tmp_path, capsys, monkeypatch):
        cfg = write_config(tmp_path)
        monkeypatch.setenv("QLB_CONFIG", str(cfg))
        rc = cli.main(["--out", str(tmp_path / "out"), "budget"])
        assert rc == 0

    def test_plot_csv_format_keeps_json(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        rc = cli.main(["--config", str(cfg), "--out", str(out),
                       "--format", "plot-csv", "report"])
        assert rc == 0
        assert (out / "report.json").is_file()
        assert (out / "budget.csv").is_file()
