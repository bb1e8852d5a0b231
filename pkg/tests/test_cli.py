import csv
import json

import numpy as np
import pytest

from ioqfr.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_steady_rf(capsys):
    code, out, _ = run(capsys, "steady", "--model", "rf",
                       "--param", "Omega=1", "--param", "kappa=1")
    assert code == 0
    report = json.loads(out)
    assert abs(report["excited_population"] - 1.0 / 3.0) <= 1e-10
    assert abs(report["gap"] - 0.5) <= 1e-10
    assert report["residual"] <= 1e-10
    assert len(report["model_hash"]) == 64
    rho = np.array(report["rho_re"]) + 1j * np.array(report["rho_im"])
    assert abs(np.trace(rho) - 1.0) <= 1e-12


def test_steady_kerr_photon_number(capsys):
    code, out, _ = run(capsys, "steady", "--model", "kerr_cat")
    assert code == 0
    report = json.loads(out)
    assert abs(report["photon_number"] - 0.9342429617795038) <= 1e-9


def test_steady_classical_config(tmp_path, capsys):
    config = tmp_path / "classical.json"
    config.write_text(json.dumps({
        "model": "classical_jump",
        "rates": [[0.0, 2.0], [1.0, 0.0]],
        "weights": [[[0.0, 1.0], [1.0, 0.0]]],
    }))
    code, out, _ = run(capsys, "steady", "--model", str(config))
    assert code == 0
    populations = json.loads(out)["populations"]
    np.testing.assert_allclose(populations, [2.0 / 3.0, 1.0 / 3.0], atol=1e-12)


def test_sweep_csv_round_trip(tmp_path, capsys):
    out_path = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--model", "rf", "--n", "5",
                     "--wmax", "2", "--out", str(out_path))
    assert code == 0
    with open(out_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 5
    assert list(rows[0]) == ["omega", "S", "Re_R_0", "Im_R_0", "r_0",
                             "lambda_max", "margin_min", "pass"]
    first = rows[0]
    assert float(first["omega"]) == 0.0
    assert abs(float(first["S"]) - 17.0 / 9.0) <= 1e-12
    assert abs(float(first["Re_R_0"]) + 5.0 / 9.0) <= 1e-12
    assert abs(float(first["r_0"]) - 25.0 / 51.0) <= 1e-12
    assert all(row["pass"] == "1" for row in rows)


def test_sweep_deterministic_bytes(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        code, _, _ = run(capsys, "sweep", "--model", "kerr_cat", "--n", "7",
                         "--wmin", "-2", "--wmax", "2", "--out", str(path))
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert b"\r" not in paths[0].read_bytes()


def test_sweep_multi_theta_header(capsys):
    code, out, _ = run(capsys, "sweep", "--model", "rf", "--n", "2",
                       "--wmax", "1", "--theta", "0.3", "--theta", "0.9")
    assert code == 0
    header = out.splitlines()[0].split(",")
    assert header[0] == "omega"
    assert "S_th0" in header and "S_th1" in header
    assert "pass_th0" in header and "pass_th1" in header


def test_sweep_json_mode(capsys):
    code, out, _ = run(capsys, "sweep", "--model", "rf", "--n", "3",
                       "--wmax", "1", "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["columns"][0] == "omega"
    assert len(payload["rows"]) == 3


def test_custom_config_matches_builtin(tmp_path, capsys):
    config = tmp_path / "qubit.json"
    config.write_text(json.dumps({
        "model": "custom",
        "dim": 2,
        "hamiltonian": [{"row": 0, "col": 1, "re": 0.5},
                        {"row": 1, "col": 0, "re": 0.5}],
        "channels": [[{"row": 1, "col": 0, "re": 1.0}]],
        "monitored": [[0, np.pi / 2]],
        "signal": {"mode": "kinetic", "coefficients": [[1.0]]},
    }))
    code, out_custom, _ = run(capsys, "sweep", "--model", str(config),
                              "--n", "3", "--wmax", "1")
    assert code == 0
    code, out_builtin, _ = run(capsys, "sweep", "--model", "rf",
                               "--n", "3", "--wmax", "1")
    assert code == 0
    assert out_custom == out_builtin


def test_bound_report_kerr(tmp_path, capsys):
    out_path = tmp_path / "report.json"
    code, _, _ = run(capsys, "bound-report", "--model", "kerr_cat",
                     "--wmin", "-3", "--wmax", "3", "--n", "11",
                     "--out", str(out_path))
    assert code == 0
    report = json.loads(out_path.read_text())
    assert report["all_passed"]
    assert max(report["lambda_max"]) < 1.0
    assert report["metadata"]["seed"] == 20260814


def test_bound_report_cavity(capsys):
    code, out, _ = run(capsys, "bound-report", "--model", "cavity",
                       "--param", "kappa=2", "--n", "9")
    assert code == 0
    report = json.loads(out)
    assert report["kind"] == "coherent_ceiling"
    np.testing.assert_allclose(report["ratios"], 4.0, atol=1e-12)


def test_config_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    cases = [
        ("steady", "--model", str(bad)),
        ("steady", "--model", "no_such_model"),
        ("steady", "--model", "cavity"),
        ("sweep", "--model", "classical_jump"),
        ("steady", "--model", "rf", "--param", "bogus=1"),
        ("steady", "--model", "rf", "--param", "kappa"),
        ("steady", "--model", "rf", "--tol", "nope=1"),
        ("sweep", "--model", "rf", "--n", "0"),
        ("sweep", "--model", "rf", "--wmin", "2", "--wmax", "1"),
        ("verify", "no_such_suite"),
    ]
    for argv in cases:
        code, _, err = run(capsys, *argv)
        assert code == 1, argv
        assert err.startswith("error:"), argv


def test_sweep_classical_rejected(tmp_path, capsys):
    config = tmp_path / "classical.json"
    config.write_text(json.dumps({
        "model": "classical_jump",
        "rates": [[0.0, 1.0], [1.0, 0.0]],
        "weights": [[[0.0, 1.0], [1.0, 0.0]]],
    }))
    code, _, err = run(capsys, "sweep", "--model", str(config))
    assert code == 1
    assert "monitored" in err


def test_not_mixing_exits_2(tmp_path, capsys):
    config = tmp_path / "no_channels.json"
    config.write_text(json.dumps({
        "model": "custom", "dim": 2,
        "hamiltonian": [], "channels": [], "monitored": [],
    }))
    code, _, err = run(capsys, "steady", "--model", str(config))
    assert code == 2
    assert "error:" in err


def test_verify_subset(capsys):
    code, out, _ = run(capsys, "verify", "cavity_saturation",
                       "rayleigh_identity")
    assert code == 0
    assert "PASS cavity_saturation" in out
    assert "2/2 suites passed" in out


def test_verify_json_failure_exit_2(capsys):
    # an impossible residual tolerance must fail the suite, not crash it
    code, out, _ = run(capsys, "verify", "rf_closed_forms",
                       "--tol", "trace=1e-30", "--json")
    assert code == 2
    rows = json.loads(out)
    assert rows[0]["name"] == "rf_closed_forms"
    assert not rows[0]["passed"]


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--help"])
    assert info.value.code == 0
    assert "steady" in capsys.readouterr().out
