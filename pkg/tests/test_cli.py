import csv

import numpy as np
import pytest

from vrs_sim.analysis import polarization_curve
from vrs_sim.cli import SPECTRA_HEADER, main


def run(tmp_path, text, *args, name="run.ini", out="out"):
    cfg = tmp_path / name
    cfg.write_text(text)
    code = main([str(cfg), "--out", str(tmp_path / out), *args])
    return code, tmp_path / out


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_resonance_outputs(tmp_path):
    code, out = run(tmp_path, "[detection]\ntheta_proj = 90\n", "--svg")
    assert code == 0
    with open(out / "spectra.csv") as fh:
        assert fh.readline().strip() == ",".join(SPECTRA_HEADER)
    data = np.loadtxt(out / "spectra.csv", delimiter=",", skiprows=1)
    assert data.shape == (2001, 7)
    summary = rows(out / "summary.csv")
    total = next(r for r in summary if r["channel"] == "total")
    assert float(total["splitting_ueV"]) == pytest.approx(75.0, rel=0.10)
    assert (out / "spectra.svg").read_text().startswith("<svg")


def test_output_is_deterministic(tmp_path):
    text = "[physics]\nomega_c = 5\n[detection]\ntheta_proj = 20\n"
    _, a = run(tmp_path, text, "--svg", out="a")
    _, b = run(tmp_path, text, "--svg", out="b")
    for name in ("spectra.csv", "summary.csv", "spectra.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_thread_count_does_not_change_bytes(tmp_path, monkeypatch):
    text = "[grid]\nn_points = 401\n"
    monkeypatch.setenv("VRS_SIM_THREADS", "1")
    _, a = run(tmp_path, text, out="a")
    monkeypatch.setenv("VRS_SIM_THREADS", "3")
    _, b = run(tmp_path, text, out="b")
    assert (a / "spectra.csv").read_bytes() == (b / "spectra.csv").read_bytes()


def test_hwp_sweep_asymmetry_flips(tmp_path):
    code, out = run(tmp_path, "[run]\nmode = hwp-sweep\nsweep = 47.5, 53.5\n")
    assert code == 0
    summary = rows(out / "summary.csv")
    assert [float(r["sweep_value"]) for r in summary] == [47.5, 53.5]
    a0, a1 = (float(r["asymmetry"]) for r in summary)
    assert a0 * a1 < 0
    with open(out / "spectra.csv") as fh:
        assert fh.readline().strip() == "sweep_value," + ",".join(SPECTRA_HEADER)


def test_complementarity(tmp_path):
    code, out = run(tmp_path, "[run]\nmode = complementarity\n")
    assert code == 0
    assert (out / "spectra_emitter_driven.csv").exists()
    assert (out / "spectra_cavity_driven.csv").exists()
    summary = rows(out / "summary.csv")

    def pick(label):
        return next(
            r for r in summary if r["label"] == label and r["channel"] == "s_a" and float(r["sweep_value"]) == 90.0
        )

    emitter, cavity = pick("emitter_driven"), pick("cavity_driven")
    assert float(cavity["central_dip"]) < float(emitter["central_dip"])
    assert float(cavity["peak_separation_ueV"]) < float(emitter["peak_separation_ueV"])


def test_detuning_sweep(tmp_path):
    code, out = run(tmp_path, "[grid]\nn_points = 801\n[run]\nmode = detuning-sweep\nsweep = -60, 0, 60\n")
    assert code == 0
    assert len(rows(out / "summary.csv")) == 3
    data = np.loadtxt(out / "spectra.csv", delimiter=",", skiprows=1)
    assert data.shape == (3 * 801, 8)


def test_fit_polarization_data(tmp_path):
    alpha = np.linspace(0, 180, 37)
    y = polarization_curve(alpha, 42.6, 80.8, 100.0)
    np.savetxt(tmp_path / "pol.csv", np.column_stack([alpha, y]), delimiter=",", header="alpha,counts", comments="")
    code, out = run(tmp_path, "[run]\nmode = fit\ndata = pol.csv\ndata_kind = polarization\n")
    assert code == 0
    (row,) = rows(out / "summary.csv")
    assert float(row["theta_a_deg"]) == pytest.approx(42.6, abs=1e-4)
    assert float(row["phi_qd_deg"]) == pytest.approx(80.8, abs=1e-4)


def test_fit_spectrum_data(tmp_path):
    x = np.linspace(-200, 200, 801)
    y = sum((20 / np.pi) / ((x - c) ** 2 + 400) for c in (-35.0, 35.0))
    np.savetxt(tmp_path / "spec.csv", np.column_stack([x, y]), delimiter=",")
    code, out = run(tmp_path, "[detection]\ninstrument_fwhm = 0\n[run]\nmode = fit\ndata = spec.csv\n")
    assert code == 0
    (row,) = rows(out / "summary.csv")
    assert float(row["splitting_ueV"]) == pytest.approx(70.0, abs=1e-3)


def test_config_error_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "[physics]\nkapa = 66\n")
    assert code == 2
    assert "kapa" in capsys.readouterr().err


def test_missing_config_exit_code(tmp_path):
    assert main([str(tmp_path / "missing.ini")]) == 2


def test_bad_data_file_exit_code(tmp_path):
    code, _ = run(tmp_path, "[run]\nmode = fit\ndata = nothing.csv\n")
    assert code == 2


def test_numeric_error_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "[physics]\n", "--grid-points", "50")
    assert code == 3
    assert "GridTooCoarse" in capsys.readouterr().err
