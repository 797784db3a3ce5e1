import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from pnrstats.cli import main
from pnrstats.config import ExperimentConfig, config_from_dict, load_config
from pnrstats.errors import ConfigError, ShotIOError
from pnrstats.shotio import read_shots, write_shots
from pnrstats.stats import ShotSeries, g2_detected

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return path


# -- config --------------------------------------------------------------------

def test_defaults():
    cfg = ExperimentConfig()
    assert cfg.shots == 100_000 and cfg.seed == 12345
    assert "workers" not in cfg.to_dict()["run"]


def test_config_round_trip():
    cfg = load_config(CONFIGS / "power_sweep.json")
    assert config_from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize("raw", [
    {"sorce": {}},
    {"source": {"mean_photon": 3}},
    {"run": {"shot": 10}},
    {"run": {"shots": 0}},
    {"source": {"kind": "laser"}},
    {"sweep": {"parameter": "pump_energy", "values": []}},
    {"sweep": {"parameter": "gain", "values": [1]}},
    {"stability": {"table": [[1.0, 0.1], [0.5, 0.0]]}},
    {"detector1": {"efficiency": 2}},
    [],
])
def test_bad_configs(raw):
    with pytest.raises(ConfigError):
        config_from_dict(raw)


def test_unreadable_config_is_io_error(tmp_path):
    with pytest.raises(ShotIOError):
        load_config(tmp_path / "missing.json")


def test_sample_configs_load():
    for p in CONFIGS.glob("*.json"):
        load_config(p)


# -- exit codes ------------------------------------------------------------------

def test_unknown_key_exits_2(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"source": {"mean_photonz": 3}})
    code, _, err = run(["simulate", "--config", cfg, "--shots", 100], capsys)
    assert code == 2
    assert "mean_photonz" in err


def test_invalid_json_exits_2(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text("{ not json")
    assert run(["simulate", "--config", p], capsys)[0] == 2


def test_bad_flag_value_exits_2(capsys):
    assert run(["simulate", "--shots", 0], capsys)[0] == 2


def test_missing_input_exits_3(tmp_path, capsys):
    assert run(["analyze", tmp_path / "none.csv"], capsys)[0] == 3
    assert run(["simulate", "--config", tmp_path / "none.json"], capsys)[0] == 3


def test_parse_error_exits_3(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("arm1,arm2\n1,x\n")
    code, _, err = run(["analyze", p], capsys)
    assert code == 3 and "line 2" in err


def test_zero_mean_exits_4(tmp_path, capsys):
    p = tmp_path / "zeros.csv"
    write_shots(ShotSeries(np.zeros(200, dtype=int)), p)
    assert run(["analyze", p, "--resamples", 100], capsys)[0] == 4


def test_no_peaks_exits_4(tmp_path, capsys):
    p = tmp_path / "flat.csv"
    p.write_text("value\n" + "".join(f"{v}\n" for v in np.linspace(0, 1, 2000)))
    assert run(["reconstruct", p, "--resamples", 100], capsys)[0] == 4


# -- critical-power --------------------------------------------------------------

def test_critical_power_cli(capsys):
    code, out, _ = run(["critical-power", "--wavelength", 1030e-9, "--n0", 1.82,
                        "--n2", 6.13e-20, "--tau", 190e-15], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["critical_power_W"] == pytest.approx(1.4e6, rel=0.01)
    assert round(rep["critical_energy_uJ"], 2) == 0.27
    assert "0.3 uJ" in rep["note"]


def test_critical_power_defaults_and_csv(capsys):
    code, out, _ = run(["critical-power", "--format", "csv"], capsys)
    assert code == 0
    head, row = out.splitlines()
    assert head == "critical_power_W,critical_energy_J"
    assert float(row.split(",")[0]) == pytest.approx(1407491.1315934816, rel=1e-12)


def test_critical_power_invalid_material_exits_2(capsys):
    assert run(["critical-power", "--n0", 0.5], capsys)[0] == 2


# -- pipelines -------------------------------------------------------------------

def test_simulate_writes_outputs(tmp_path, capsys):
    code, _, _ = run(["simulate", "--config", CONFIGS / "reconstruction.json", "--shots", 20_000,
                      "--resamples", 200, "--out", tmp_path], capsys)
    assert code == 0
    for name in ("photons.csv", "detected.csv", "analog_arm1.csv", "report.json"):
        assert (tmp_path / name).exists()
    rep = json.loads((tmp_path / "report.json").read_text())
    assert set(rep) == {"config", "stats", "distribution", "calibration", "sweep"}
    assert rep["config"]["run"]["shots"] == 20_000
    assert rep["config"]["source"]["mean_photons"] == 23.85
    assert rep["distribution"]["fidelity_to_poisson"] > 0.99
    assert rep["stats"]["arm1"]["mean"] == pytest.approx(4.77, abs=0.1)


def test_flags_override_config_file(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"run": {"shots": 5000, "seed": 1, "resamples": 100}})
    code, out, _ = run(["simulate", "--config", cfg, "--seed", 7], capsys)
    assert code == 0
    run_sec = json.loads(out)["config"]["run"]
    assert run_sec["seed"] == 7 and run_sec["shots"] == 5000


def test_analyze_paired_and_single(tmp_path, capsys):
    run(["simulate", "--shots", 10_000, "--resamples", 100, "--out", tmp_path], capsys)
    code, out, _ = run(["analyze", tmp_path / "detected.csv", "--resamples", 200], capsys)
    assert code == 0
    rep = json.loads(out)
    assert {"arm1", "arm2"} <= set(rep["stats"])
    assert rep["stats"]["arm1"]["g11"] == rep["stats"]["arm2"]["g11"]
    pair = read_shots(tmp_path / "detected.csv")
    assert rep["stats"]["arm1"]["g2"] == g2_detected(pair.arm1)

    single = tmp_path / "single.csv"
    write_shots(pair.arm1, single)
    code, out, _ = run(["analyze", single, "--format", "csv"], capsys)
    assert code == 0 and out.startswith("m,probability,uncertainty\n")


def test_reconstruct_from_analog(tmp_path, capsys):
    run(["simulate", "--shots", 20_000, "--resamples", 100, "--out", tmp_path], capsys)
    out_dir = tmp_path / "rec"
    code, _, _ = run(["reconstruct", tmp_path / "analog_arm1.csv", "--pedestal", 0,
                      "--resamples", 100, "--out", out_dir], capsys)
    assert code == 0
    rep = json.loads((out_dir / "report.json").read_text())
    sim = json.loads((tmp_path / "report.json").read_text())
    assert rep["distribution"]["probs"] == sim["distribution"]["probs"]
    assert (out_dir / "histogram.csv").exists()

    # a stored calibration can be reapplied
    code, out, _ = run(["reconstruct", tmp_path / "analog_arm1.csv", "--calibration",
                        out_dir / "report.json", "--resamples", 100], capsys)
    assert code == 0
    assert json.loads(out)["distribution"]["probs"] == rep["distribution"]["probs"]


def test_sweep_cli(tmp_path, capsys):
    code, _, _ = run(["sweep", "--config", CONFIGS / "mean_sweep.json", "--shots", 5000,
                      "--resamples", 100, "--out", tmp_path], capsys)
    assert code == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0].split(",")[:3] == ["parameter_value", "mean1", "mean2"]
    assert len(lines) == 6
    rep = json.loads((tmp_path / "report.json").read_text())
    assert len(rep["sweep"]["rows"]) == 5 and rep["config"]["sweep"]["parameter"] == "mean_photons"


def test_sweep_without_section_exits_2(capsys):
    assert run(["sweep", "--shots", 100], capsys)[0] == 2


def test_reports_identical_across_workers(tmp_path, capsys):
    outs = []
    for w in (1, 3):
        d = tmp_path / f"w{w}"
        assert run(["simulate", "--shots", 150_000, "--resamples", 100, "--workers", w,
                    "--out", d], capsys)[0] == 0
        outs.append({p.name: p.read_bytes() for p in d.iterdir()})
    assert outs[0] == outs[1]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "pnrstats", "critical-power"], capture_output=True, text=True)
    assert r.returncode == 0 and "critical_power_W" in r.stdout
