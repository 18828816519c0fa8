import csv
import json
import math

import numpy as np
import pytest

from optosta.cli import main


def _write(path, data):
    path.write_text(json.dumps(data, indent=2))
    return path


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_simulate_preset_writes_files(tmp_path, capsys):
    out = tmp_path / "fig2"
    assert main(["--preset", "fig2", "simulate", "-o", str(out)]) == 0
    assert "fidelity" in capsys.readouterr().out
    for name in ("trajectory.csv", "plot.gp", "summary.json"):
        assert (out / name).exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["fidelity"] >= 0.95
    assert summary["converged"] is True
    rows = _rows(out / "trajectory.csv")
    assert float(rows[0]["t"]) == 0.0 and float(rows[-1]["t"]) == 1.0
    assert "cost_frobenius" in rows[0]


def test_simulate_config_with_all_outputs(tmp_path):
    cfg = _write(tmp_path / "c.json", {"protocol": "sin4-cd", "ordering": "counterintuitive",
                                       "G": 50, "tau": 0.1, "T": 1,
                                       "outputs": ["trajectory", "cost", "eigen"]})
    out = tmp_path / "o"
    assert main(["simulate", str(cfg), "-o", str(out)]) == 0
    for name in ("trajectory.csv", "eigen.csv", "costs.csv", "cost_report.json", "summary.json"):
        assert (out / name).exists()
    summary = json.loads((out / "summary.json").read_text())
    assert "cost" in summary


def test_zero_coupling_keeps_initial_state(tmp_path):
    cfg = _write(tmp_path / "c.json", {"protocol": "sin4", "G": 0, "tau": 0.1, "T": 1,
                                       "initial_state": [0.6, 0, [0, 0.8]]})
    out = tmp_path / "o"
    assert main(["simulate", str(cfg), "-o", str(out)]) == 0
    rows = _rows(out / "trajectory.csv")
    for r in rows:
        assert float(r["p_a1"]) == pytest.approx(0.36, abs=1e-15)
        assert float(r["p_a2"]) == pytest.approx(0.64, abs=1e-15)


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{\n  "protocol": "invariant",\n  "T": 1,\n  "xii": 0.1\n}\n')
    assert main(["simulate", str(cfg), "-o", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "xii" in err and "line 4" in err
    assert main(["simulate", str(tmp_path / "missing.json")]) == 2
    bad = _write(tmp_path / "b.json", {"protocol": "invariant", "T": -1, "xi": 0.1})
    assert main(["simulate", str(bad)]) == 2


def test_divergence_exit_code(tmp_path):
    cfg = _write(tmp_path / "c.json", {"protocol": "sin4", "G": 1e9, "tau": 0.1, "T": 1, "dt": 0.1})
    assert main(["simulate", str(cfg), "-o", str(tmp_path / "o")]) == 3


def test_domain_error_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"protocol": "sin4", "G": 1, "tau": 0.1, "T": 1,
                                       "kappa1": 5, "kappa2": 5, "gamma": 5})
    assert main(["cost", str(cfg), "-o", str(tmp_path / "o")]) == 4
    assert "radicand" in capsys.readouterr().err


def test_cost_command_for_preset(tmp_path):
    out = tmp_path / "o"
    assert main(["cost", "--preset", "fig2", "-o", str(out)]) == 0
    rep = json.loads((out / "cost_report.json").read_text())
    assert rep["discrepancy_flag"] is True
    assert rep["C_frobenius"] < rep["C_spectral"]


def test_fig4_files(tmp_path):
    out = tmp_path / "f4"
    assert main(["--preset", "fig4", "cost", "-o", str(out)]) == 0
    csvs = sorted(out.glob("fig4_theta_*.csv"))
    assert len(csvs) == 4
    assert (out / "fig4.gp").exists() and (out / "fig4_summary.json").exists()
    flat = _rows(csvs[0])
    vals = {r[list(r)[1]] for r in flat}
    assert len(vals) == 1


def _fidelities(path):
    return [float(r["fidelity"]) for r in _rows(path)]


def test_sweep_xi_reduces_fidelity(tmp_path):
    spec = _write(tmp_path / "s.json", {"parameter": "xi", "grid": [0.05, 0.1, 0.2], "preset": "fig2"})
    assert main(["sweep", str(spec), "-o", str(tmp_path / "o"), "--jobs", "1"]) == 0
    fid = _fidelities(tmp_path / "o" / "summary.csv")
    assert fid[0] > fid[1] > fid[2]


def test_singleton_sweep_matches_simulate(tmp_path):
    spec = _write(tmp_path / "s.json", {"parameter": "xi", "grid": [0.1], "preset": "fig2"})
    assert main(["sweep", str(spec), "-o", str(tmp_path / "sw")]) == 0
    assert main(["--preset", "fig2", "simulate", "-o", str(tmp_path / "sim")]) == 0
    sim = json.loads((tmp_path / "sim" / "summary.json").read_text())
    assert _fidelities(tmp_path / "sw" / "summary.csv")[0] == sim["fidelity"]
    point = tmp_path / "sw" / "points" / "point_0000" / "trajectory.csv"
    assert point.read_bytes() == (tmp_path / "sim" / "trajectory.csv").read_bytes()


def test_kappa_sweep_scales_by_decay(tmp_path):
    spec = _write(tmp_path / "s.json", {"parameter": "kappa", "grid": [0.0, 0.1, 1.0], "preset": "fig2"})
    assert main(["sweep", str(spec), "-o", str(tmp_path / "o"), "--jobs", "2"]) == 0
    f0, f1, f2 = _fidelities(tmp_path / "o" / "summary.csv")
    assert f1 / f0 == pytest.approx(math.exp(-0.1), rel=1e-7)
    assert f2 / f0 == pytest.approx(math.exp(-1.0), rel=1e-7)


def test_failed_sweep_point_is_recorded(tmp_path):
    spec = _write(tmp_path / "s.json", {"parameter": "G", "grid": [10, 1e9],
                                        "base": {"protocol": "sin4", "G": 1, "tau": 0.1,
                                                 "T": 1, "dt": 0.1}})
    assert main(["sweep", str(spec), "-o", str(tmp_path / "o"), "--jobs", "1"]) == 0
    rows = _rows(tmp_path / "o" / "summary.csv")
    assert [r["status"] for r in rows] == ["ok", "failed"]
    assert "DivergenceError" in rows[1]["error"]


def test_validate(capsys):
    assert main(["validate", "--list"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 12
    assert main(["validate"]) == 0
    assert "12/12" in capsys.readouterr().out
    assert main(["validate", "--debug-coarse-dt"]) == 1


@pytest.mark.parametrize("preset", ["fig1", "fig3"])
def test_repeated_runs_are_byte_identical(tmp_path, preset):
    for d in ("a", "b"):
        assert main(["--preset", preset, "simulate", "-o", str(tmp_path / d)]) == 0
    for name in ("trajectory.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_config_echo_replays(tmp_path):
    assert main(["--preset", "fig2", "simulate", "-o", str(tmp_path / "a")]) == 0
    echo = json.loads((tmp_path / "a" / "summary.json").read_text())["config"]
    cfg = _write(tmp_path / "echo.json", echo)
    assert main(["simulate", str(cfg), "-o", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "trajectory.csv").read_bytes()
    assert a == (tmp_path / "b" / "trajectory.csv").read_bytes()
    fa = json.loads((tmp_path / "a" / "summary.json").read_text())["fidelity"]
    fb = json.loads((tmp_path / "b" / "summary.json").read_text())["fidelity"]
    assert fa == fb
    assert np.isfinite(fa)
