import json
import math

import numpy as np
import pytest

from qsawtooth import io
from qsawtooth.cli import main, read_config


def run(*argv):
    return main([str(a) for a in argv])


def strip_timestamp(path):
    meta = json.loads(path.read_text())
    meta.pop("timestamp")
    return meta


def test_selftest(capsys):
    assert run("--selftest") == 0
    assert "FAIL" not in capsys.readouterr().out


def test_no_command_is_usage_error():
    assert run() == 2


def test_fidelity_zero_noise(tmp_path):
    out = tmp_path / "f.csv"
    assert run("fidelity", "--n", 5, "--K", 0.9, "--sigma", 0, "--steps", 4, "--out", out) == 0
    rows = io.read_table(out)
    assert [r["f_mean"] for r in rows] == [1.0] * 5
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["schema"] == "fidelity"
    assert meta["config"]["K"] == 0.9 and meta["build"].startswith("qsawtooth-")


def test_fidelity_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["fidelity", "--n", 6, "--K", 0.6, "--sigma", 0.9, "--steps", 5, "--realizations", 20]
    assert run(*args, "--out", a) == 0
    assert run(*args, "--out", b, "--workers", 2) == 0
    assert a.read_bytes() == b.read_bytes()
    ma, mb = strip_timestamp(a.with_suffix(".json")), strip_timestamp(b.with_suffix(".json"))
    ma["config"].pop("out"), mb["config"].pop("out")
    ma["config"].pop("workers"), mb["config"].pop("workers")
    assert ma == mb


def test_fidelity_invalid_params(tmp_path, capsys):
    assert run("fidelity", "--n", 5, "--K", -1, "--out", tmp_path / "x.csv") == 1
    assert "error" in capsys.readouterr().err
    assert not (tmp_path / "x.csv").exists()
    assert run("fidelity", "--n", 5, "--out", tmp_path / "x.csv") == 2


def test_sigma_sweep(tmp_path):
    out = tmp_path / "r.csv"
    code = run(
        "sigma-sweep", "--n", 6, "--K", 0.6, "--sigma", "0.05,0.5,100",
        "--steps", 8, "--realizations", 20, "--out", out,
    )
    assert code == 0
    rows = io.read_table(out)
    assert [r["sigma"] for r in rows] == [0.05, 0.5, 100]
    C = rows[0]["gamma0"] / 0.05**2
    assert rows[1]["golden_rule"] == pytest.approx(C * 0.25)
    assert rows[2]["underconstrained"] is True and math.isnan(rows[2]["gamma_fit"])
    assert rows[0]["underconstrained"] is False


def test_sigma_sweep_usage(tmp_path):
    out = tmp_path / "r.csv"
    assert run("sigma-sweep", "--n", 5, "--K", 0.6, "--sigma", "0.3", "--out", out) == 2
    with pytest.warns(UserWarning, match="duplicate"):
        code = run("sigma-sweep", "--n", 5, "--K", 0.6, "--sigma", "0.3,0.3", "--out", out)
    assert code == 2
    with pytest.warns(UserWarning, match="duplicate"):
        code = run(
            "sigma-sweep", "--n", 5, "--K", 0.6, "--sigma", "0.3,0.3,1",
            "--steps", 4, "--realizations", 4, "--out", out,
        )
    assert code == 0 and len(io.read_table(out)) == 2


def test_regime_table(tmp_path):
    out = tmp_path / "reg.csv"
    assert run("regime", "--n", "3-14", "--out", out) == 0
    rows = io.read_table(out)
    assert [int(r["n"]) for r in rows] == list(range(3, 15))
    first_nonempty = min(int(r["n"]) for r in rows if r["nonempty"])
    assert first_nonempty == 6
    assert rows[3]["K_loc"] == pytest.approx(0.5911, abs=1e-4)
    assert run("regime", "--n", "", "--out", out) == 2


def test_min_qubits(capsys):
    assert run("min-qubits") == 0
    assert capsys.readouterr().out.strip() == "6"


def test_hardware(tmp_path):
    out = tmp_path / "hw.csv"
    assert run("hardware", "--n", "6-12", "--rounding", "hand", "--out", out) == 0
    rows = {(r["profile"], int(r["n"])): r for r in io.read_table(out)}
    assert (rows["IBM-Q", 6]["r_best"], rows["IBM-Q", 6]["r_worst"]) == (2.5, 13)
    assert (rows["IonQ", 6]["r_best"], rows["IonQ", 6]["r_worst"]) == (0.87, 9.6)
    assert all(r["r_best"] <= r["r_worst"] for r in rows.values())


def test_hardware_bad_profile(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[profile]\nname = X\nn_ref = 3\neps_reported = 0.01\ngate_depth_ref = 9\n")
    assert run("hardware", "--profile", bad, "--n", 6, "--out", tmp_path / "h.csv") == 1
    assert "gamma0_ref" in capsys.readouterr().err


def test_classical(tmp_path):
    out = tmp_path / "d.csv"
    args = ["classical", "--K", "2,-2", "--eps", "0", "--size", 500, "--steps", 20, "--out", out]
    assert run(*args) == 0
    first = out.read_bytes()
    rates = io.read_table(tmp_path / "d_rates.csv")
    assert rates[1]["K"] == -2 and abs(rates[1]["rate"]) < 1e-2
    assert math.isnan(rates[1]["rate_theory"])
    assert run(*args) == 0
    assert out.read_bytes() == first


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    out = tmp_path / "f.csv"
    cfg.write_text(f"# fidelity run\nn = 5\nK = 0.9\nsigma = 0.5\nsteps = 3\nrealizations = 4\nout = {out}\n")
    assert read_config(cfg)["n"] == "5"
    assert run("--config", cfg, "fidelity", "--steps", 6) == 0
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["config"]["n"] == 5 and meta["config"]["steps"] == 6
    assert len(io.read_table(out)) == 7


def test_bad_config_is_usage_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just words\n")
    assert run("--config", cfg, "regime") == 2


def test_csv_round_trips_doubles(tmp_path):
    x = 0.1 + 0.2
    path, _ = io.write_table(tmp_path / "t", "diffusion", [
        {"K": 2.0, "eps": 0.0, "t": 1, "msd_mean": x, "msd_stderr": np.float64(1 / 3)}
    ])
    row = io.read_table(path)[0]
    assert row["msd_mean"] == x and row["msd_stderr"] == 1 / 3
    with pytest.raises(KeyError):
        io.write_table(tmp_path / "u.csv", "regime", [{"n": 3}])
