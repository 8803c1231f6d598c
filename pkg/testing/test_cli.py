# testing/test_cli.py

import json

import numpy as np
import pandas as pd
import pytest

from data.reports import read_json
from inference.disambiguation import circular_distance
from main import main
from spectral.jsa import StateConfig


def _small_config(tmp_path, **grid):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"grid": {"n_points": 256, **grid}}, indent=2))
    return str(path)


def test_simulate_is_reproducible(tmp_path):
    config = _small_config(tmp_path)
    assert main(["simulate", "--config", config, "--out", str(tmp_path / "a")]) == 0
    assert main(["simulate", "--config", config, "--out", str(tmp_path / "b")]) == 0
    for name in ("jsa.bin", "jsa.csv", "jsi.csv", "jsi.pgm", "schmidt.json", "modes1.bin", "modes2.bin"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert 3.9 < read_json(tmp_path / "a" / "schmidt.json")["schmidt_number"] < 4.1


def test_hom_then_fit_recovers_curve_parameters(tmp_path):
    config = _small_config(tmp_path)
    out = tmp_path / "out"
    assert main(["hom", "--config", config, "--out", str(out), "--phi", "1.0"]) == 0
    assert main(["fit", str(out / "hom_phi_1.0000.csv"), "--config", config, "--out", str(out)]) == 0

    fitted = read_json(out / "fit.json")["params"]
    state = StateConfig()
    assert fitted["N"] == pytest.approx(1000.0, rel=1e-6)
    assert fitted["V"] == pytest.approx(1.0, abs=1e-6)
    assert fitted["delta"] == pytest.approx(state.bin_spacing, rel=1e-6)
    assert fitted["sigma"] == pytest.approx(state.bin_width_omega, rel=1e-6)
    assert circular_distance(fitted["phi"], 1.0) < 1e-6
    assert (out / "fit_residuals.csv").exists()


def test_invalid_config_exits_with_config_code(tmp_path, capsys):
    assert main(["simulate", "--config", _small_config(tmp_path, span=0.0), "--out", str(tmp_path)]) == 2
    assert not (tmp_path / "jsa.bin").exists()


def test_malformed_data_exits_with_config_code(tmp_path):
    data = tmp_path / "bad.csv"
    data.write_text("delay_ps,counts\n0.0,nan?\n")
    assert main(["fit", str(data), "--out", str(tmp_path)]) == 2


def test_bad_bound_syntax(tmp_path):
    config = _small_config(tmp_path)
    out = tmp_path / "out"
    main(["hom", "--config", config, "--out", str(out), "--phi", "1.0"])
    assert main(["fit", str(out / "hom_phi_1.0000.csv"), "--out", str(out), "--bound", "phi"]) == 2


def test_infer_selects_the_simulated_phase(tmp_path):
    config = _small_config(tmp_path)
    out = tmp_path / "out"
    assert main(["simulate", "--config", config, "--out", str(out)]) == 0
    assert main(["hom", "--config", config, "--out", str(out), "--phi", "0"]) == 0
    assert main(["fit", str(out / "hom_phi_0.0000.csv"), "--config", config, "--out", str(out)]) == 0
    assert main(["infer", "--config", config, "--out", str(out), "--jsi", str(out / "jsi.csv"),
                 "--fit", str(out / "fit.json"), "--rounds", "5"]) == 0

    report = read_json(out / "report.json")
    assert report["disambiguation"]["selected_phi"] == 0.0
    assert len(report["lobes"]) == 4
    assert np.isfinite(report["k_estimate"]["mean"])
    signs = np.loadtxt(out / "mask.csv", delimiter=",")
    assert signs.shape == (256, 256)
    assert (out / "jsa_inferred.bin").exists()


def test_wide_fit_error_is_ambiguous(tmp_path):
    config = _small_config(tmp_path)
    out = tmp_path / "out"
    assert main(["simulate", "--config", config, "--out", str(out)]) == 0
    fit = {"format_version": 1,
           "params": {"N": 1000.0, "V": 1.0, "delta": 8.6, "sigma": 1.2, "phi": 0.7},
           "standard_errors": {"N": 1.0, "V": 0.1, "delta": 0.1, "sigma": 0.1, "phi": 3.0}}
    (out / "fit.json").write_text(json.dumps(fit))
    code = main(["infer", "--config", config, "--out", str(out), "--jsi", str(out / "jsi.csv"),
                 "--fit", str(out / "fit.json"), "--rounds", "3"])
    assert code == 5
    assert read_json(out / "report.json")["disambiguation"]["ambiguous"]


def test_simulate_exports_the_complex_jsa(tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "--config", _small_config(tmp_path), "--out", str(out)]) == 0
    frame = pd.read_csv(out / "jsa.csv")
    assert list(frame.columns) == ["wavelength1_nm", "wavelength2_nm", "re", "im"]
    assert len(frame) == 256 * 256


def test_tofs_writes_the_timetag_table(tmp_path):
    out = tmp_path / "out"
    assert main(["tofs", "--config", _small_config(tmp_path), "--out", str(out), "--pairs", "2000"]) == 0
    frame = pd.read_csv(out / "timetags.csv")
    assert list(frame.columns) == ["channel", "time_ps"]
    assert len(frame) == 4000
    assert set(frame["channel"]) == {1, 2}
    stats = read_json(out / "tofs.json")["stats"]
    assert stats["coincidences"] + stats["out_of_range"] == 2000


def test_fit_without_phase_error_exits_with_config_code(tmp_path):
    config = _small_config(tmp_path)
    out = tmp_path / "out"
    assert main(["simulate", "--config", config, "--out", str(out)]) == 0
    fit = {"format_version": 1,
           "params": {"N": 1000.0, "V": 1.0, "delta": 8.6, "sigma": 1.2, "phi": 0.7},
           "standard_errors": {"N": 1.0, "V": None, "delta": 0.1, "sigma": 0.1, "phi": None},
           "converged": False}
    (out / "fit.json").write_text(json.dumps(fit))
    assert main(["infer", "--config", config, "--out", str(out), "--jsi", str(out / "jsi.csv"),
                 "--fit", str(out / "fit.json"), "--rounds", "3"]) == 2
