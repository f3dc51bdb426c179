from dataclasses import replace
import math

import numpy as np
import pytest
from typer.testing import CliRunner

from src.quenchfidelity.cli import app
from src.quenchfidelity.commands.command_builder import CommandBuilder
from src.quenchfidelity.config.configfile import load_run_config, parse_overrides, worker_count
from src.quenchfidelity.core.errors import ConfigError
from src.quenchfidelity.models.model_spec import ModelSpec
from src.quenchfidelity.modes.mode_analysis import ModeClass
from src.quenchfidelity.output.writers import format_value, json_value, read_csv, write_table

runner = CliRunner()

SCAN_FILE = """\
[model]
name = xy
gamma_i = -2, 0.8

[scan]
axis1 = h
axis1_range = 0, 0
axis1_samples = 1
axis2 = eta
axis2_range = -2, -2
axis2_samples = 1
"""


def test_packaged_defaults():
    cfg = load_run_config()
    assert cfg.model.name == "xy"
    assert cfg.gamma_i == (-2.0, 0.8)
    assert cfg.gamma_f is None and not cfg.is_scan
    assert cfg.lattice_size == 30 and len(cfg.kgrid) == 14
    assert cfg.times[0] == 0.0 and cfg.times[-1] == 5.0 and len(cfg.times) == 501
    assert cfg.k_samples == 4096
    assert cfg.output_format == "csv"
    assert (cfg.seed, cfg.trials, cfg.oracle_trials) == (20240601, 10000, 1000)


def test_overrides_and_files_layer_over_the_defaults(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[lattice]\nsize = 40\n\n[output]\nformat = JSON\n")
    cfg = load_run_config(str(path), {"model.gamma_f": "0, -2", "lattice.size": "50"}, require="quench")
    assert cfg.gamma_f == (0.0, -2.0)
    assert cfg.lattice_size == 50
    assert cfg.output_format == "json"


def test_scan_section_builds_two_axes(tmp_path):
    path = tmp_path / "scan.ini"
    path.write_text(SCAN_FILE)
    cfg = load_run_config(str(path), require="scan")
    assert cfg.is_scan
    assert [a.name for a in cfg.axes] == ["h", "eta"]


@pytest.mark.parametrize(
    "overrides, require, field",
    [
        ({"lattice.size": "31"}, None, "lattice.size"),
        ({"model.gamma_f": "0, -2", "scan.axis1": "h"}, None, "model.gamma_f"),
        ({}, "quench", "model.gamma_f"),
        ({}, "scan", "scan.axis1"),
        ({"output.format": "xml"}, None, "output.format"),
        ({"model.name": "kitaev"}, None, "model.name"),
        ({"model.gamma_i": "-2"}, None, "model.gamma_i"),
        ({"model.gamma_i": "-2, nan"}, None, "model.gamma_i"),
        ({"resolution.k_samples": "32"}, None, "resolution.k_samples"),
        ({"time.start": "2", "time.stop": "1"}, None, "time.stop"),
        ({"verify.trials": "0"}, None, "verify.trials"),
    ],
)
def test_invalid_configurations_name_the_field(overrides, require, field):
    with pytest.raises(ConfigError) as info:
        load_run_config(None, overrides, require)
    assert info.value.field == field


def test_equal_scan_axes_are_rejected(tmp_path):
    path = tmp_path / "scan.ini"
    path.write_text(SCAN_FILE.replace("axis2 = eta", "axis2 = h"))
    with pytest.raises(ConfigError) as info:
        load_run_config(str(path))
    assert info.value.field == "scan.axis2"


def test_syntax_errors_report_the_line(tmp_path):
    path = tmp_path / "broken.ini"
    path.write_text("[model]\nname = xy\nthis line has no separator\n")
    with pytest.raises(ConfigError) as info:
        load_run_config(str(path))
    assert info.value.field == f"{path}:3"


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(str(tmp_path / "absent.ini"))


def test_parse_overrides():
    assert parse_overrides(["model.gamma_f= 0, -2", "lattice.size=8"]) == {"model.gamma_f": "0, -2", "lattice.size": "8"}
    with pytest.raises(ConfigError):
        parse_overrides(["lattice.size"])


def test_worker_count_reads_the_environment(monkeypatch):
    monkeypatch.setenv("QUENCHFIDELITY_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("QUENCHFIDELITY_THREADS", "0")
    with pytest.raises(ConfigError):
        worker_count()


def test_cell_formatting():
    assert format_value(None) == ""
    assert format_value(True) == "true"
    assert format_value(np.bool_(False)) == "false"
    assert format_value(np.float64(0.1)) == "0.1"
    assert format_value(math.inf) == "inf"
    assert format_value(-math.inf) == "-inf"
    assert format_value(np.int64(3)) == "3"
    assert format_value(ModeClass.KC) == "Kc"
    assert json_value(math.inf) == "inf"
    assert json_value(np.float64(2.5)) == 2.5


def test_write_table_uses_the_stem_and_creates_directories(tmp_path):
    stem = str(tmp_path / "out" / "run.v2")
    paths = write_table(stem, "demo", [{"a": 1, "b": None}, {"a": 2.5, "b": True}], "both")
    assert [p.name for p in paths] == ["run.v2_demo.csv", "run.v2_demo.json"]
    assert paths[0].read_bytes() == b"a,b\r\n1,\r\n2.5,true\r\n"
    assert read_csv(paths[0]) == [{"a": "1", "b": ""}, {"a": "2.5", "b": "true"}]


def _invoke(*args):
    return runner.invoke(app, [str(a) for a in args])


def test_quench_without_gamma_f_exits_2_and_writes_nothing(tmp_path):
    result = _invoke("quench", "--set", f"output.path={tmp_path / 'run'}")
    assert result.exit_code == 2
    assert list(tmp_path.iterdir()) == []


def test_quench_writes_series_modes_and_summary(tmp_path):
    stem = tmp_path / "run"
    result = _invoke("quench", "-s", "model.gamma_f=0, -2", "-s", f"output.path={stem}")
    assert result.exit_code == 0, result.output
    series = read_csv(f"{stem}_series.csv")
    assert len(series) == 501
    assert series[0]["rate"] == "0.0"
    modes = read_csv(f"{stem}_modes.csv")
    assert len(modes) == 14
    assert sum(row["kc_neighborhood"] == "true" for row in modes) == 1
    (summary,) = read_csv(f"{stem}_summary.csv")
    assert summary["n_kc"] == "1"
    assert summary["dqpt_exists"] == "true"
    assert summary["boundary_f0"] == "0" and summary["boundary_fpi"] == "1"
    assert summary["fidelity_total"] == "0.0"


def test_identical_quench_writes_zero_rates(tmp_path):
    stem = tmp_path / "same"
    result = _invoke("quench", "-s", "model.gamma_f=-2, 0.8", "-s", f"output.path={stem}", "-s", "time.samples=21")
    assert result.exit_code == 0, result.output
    assert {row["rate"] for row in read_csv(f"{stem}_series.csv")} == {"0.0"}
    (summary,) = read_csv(f"{stem}_summary.csv")
    assert summary["dqpt_exists"] == "false"


def test_thermodynamic_quench_writes_rates_only(tmp_path):
    stem = tmp_path / "tl"
    result = _invoke(
        "quench",
        "-s", "model.gamma_f=-2, -2",
        "-s", "lattice.thermodynamic_limit=true",
        "-s", "time.samples=5",
        "-s", f"output.path={stem}",
    )
    assert result.exit_code == 0, result.output
    series = read_csv(f"{stem}_series.csv")
    assert list(series[0]) == ["t", "rate"]
    (summary,) = read_csv(f"{stem}_summary.csv")
    assert summary["L"] == ""


def test_gap_closing_quench_exits_1(tmp_path):
    result = _invoke("quench", "-s", "model.gamma_f=-0.5, 0", "-s", "lattice.size=6", "-s", f"output.path={tmp_path / 'gap'}")
    assert result.exit_code == 1


def test_modes_lists_the_single_critical_root(tmp_path):
    stem = tmp_path / "roots"
    result = _invoke("modes", "-s", "model.gamma_f=0, -2", "-s", f"output.path={stem}", "-s", "output.format=both")
    assert result.exit_code == 0, result.output
    rows = read_csv(f"{stem}_roots.csv")
    critical = [r for r in rows if r["kind"] == "Kc"]
    assert len(critical) == 1
    assert float(critical[0]["cos_k"]) == pytest.approx(-0.48906, abs=1e-5)
    assert sorted((r["kind"], r["boundary"]) for r in rows if r["boundary"] == "true") == [("K0", "true"), ("K1", "true")]
    (counts,) = read_csv(f"{stem}_mode_counts.csv")
    assert (counts["n_kc"], counts["n_k0"], counts["n_k1"]) == ("1", "1", "1")
    assert (tmp_path / "roots_roots.json").is_file()


def test_single_cell_scan_agrees_with_the_quench_summary(tmp_path):
    ini = tmp_path / "scan.ini"
    ini.write_text(SCAN_FILE)
    assert _invoke("scan", "-c", ini, "-s", f"output.path={tmp_path / 's'}").exit_code == 0
    assert _invoke("quench", "-s", "model.gamma_f=0, -2", "-s", f"output.path={tmp_path / 'q'}").exit_code == 0
    (cell,) = read_csv(f"{tmp_path / 's'}_scan.csv")
    (summary,) = read_csv(f"{tmp_path / 'q'}_summary.csv")
    for key in ("n_kc", "n_k0", "n_k1", "dqpt_exists", "sufficient", "lbar_rate", "fidelity_rate"):
        assert cell[key] == summary[key], key


def test_scan_config_rejects_gamma_f(tmp_path):
    ini = tmp_path / "scan.ini"
    ini.write_text(SCAN_FILE)
    result = _invoke("scan", "-c", ini, "-s", "model.gamma_f=0, -2", "-s", f"output.path={tmp_path / 's'}")
    assert result.exit_code == 2
    assert list(tmp_path.iterdir()) == [ini]


def test_verify_is_reproducible_and_detects_an_injected_fault(tmp_path):
    small = ["-s", "verify.trials=50", "-s", "verify.oracle_trials=10"]
    first = _invoke("verify", "--seed", 3, *small, "-s", f"output.path={tmp_path / 'a'}")
    second = _invoke("verify", "--seed", 3, *small, "-s", f"output.path={tmp_path / 'b'}")
    assert first.exit_code == 0, first.output
    assert second.exit_code == 0
    assert (tmp_path / "a_verify.csv").read_bytes() == (tmp_path / "b_verify.csv").read_bytes()
    assert all(row["passed"] == "true" for row in read_csv(tmp_path / "a_verify.csv"))

    faulty = _invoke("verify", "--seed", 3, "--inject-fault", *small, "-s", f"output.path={tmp_path / 'c'}")
    assert faulty.exit_code == 1
    failed = [row["property"] for row in read_csv(tmp_path / "c_verify.csv") if row["passed"] == "false"]
    assert failed == ["fidelity_relation"]


def test_xy_demo_needs_the_xy_model():
    other = ModelSpec("other", ("a", "b"), lambda gamma, ks: np.zeros((len(ks), 4)))
    cfg = replace(load_run_config(), model=other)
    with pytest.raises(ConfigError):
        CommandBuilder(cfg).setup_command("xy-demo")


@pytest.mark.slow
def test_xy_demo_writes_every_dataset(tmp_path):
    result = _invoke("xy-demo", "--grid-samples", 11, "-s", f"output.path={tmp_path / 'demo'}")
    assert result.exit_code == 0, result.output
    for name in ("equilibrium_phases", "dqpt_diagram", "k0_k1_diagram", "mode_density", "eta_line", "quench_points", "relation_curve"):
        assert (tmp_path / f"demo_{name}.csv").is_file()
    assert len(read_csv(tmp_path / "demo_dqpt_diagram.csv")) == 121
    assert len(read_csv(tmp_path / "demo_relation_curve.csv")) == 201
