import json
import os

import pytest

from kamdnlw.cli import main


def run(tmp_path, command, config, *extra):
    cfg = tmp_path / f"{command.replace(' ', '_')}.json"
    cfg.write_text(json.dumps(config))
    out = tmp_path / f"out_{command.replace(' ', '_')}_{len(extra)}"
    argv = command.split() + ["--config", str(cfg), "--out", str(out)] + list(extra)
    code = main(argv)
    return code, out


MODEL = {"m": 1.0, "plus_sites": [1], "xi": {"1": 1e-3}, "grid_N": 256, "j_max": 32}


def test_qp_solve_artifact(tmp_path):
    code, out = run(tmp_path, "qp-solve",
                    {"model": MODEL, "solver": {"L": 6, "tol": 1e-12}, "seed": 1})
    assert code == 0
    data = json.loads((out / "solution.json").read_text())
    assert data["meta"]["residual_collocation"] < 1e-10
    assert "provenance" in data
    prov = json.loads((out / "provenance.json").read_text())
    assert prov["command"] == "qp-solve" and "config_sha256" in prov


def test_nonexistence_blowup_artifact(tmp_path):
    cfg = {"grid_N": 64, "T": 2.0, "dt": 0.002,
           "initial": {"type": "constant_velocity", "value": 1.0, "perturbation": 0.1}}
    code, out = run(tmp_path, "nonexistence blowup", cfg)
    assert code == 0
    lines = (out / "trajectory.csv").read_text().strip().splitlines()
    assert lines[1].split(",")[-1] == "flag"
    last = lines[-1].split(",")
    assert last[-1] == "1" and float(last[0]) < 1.0
    rep = json.loads((out / "blowup.json").read_text())
    assert rep["bound_holds"] and rep["flagged"]


def test_malformed_config_exits_2_without_artifacts(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"model": ')
    out = tmp_path / "bad_out"
    assert main(["qp-solve", "--config", str(cfg), "--out", str(out)]) == 2
    assert not out.exists()


def test_missing_key_exits_2(tmp_path):
    code, out = run(tmp_path, "qp-solve", {"model": {"m": 1.0}})
    assert code == 2
    assert not out.exists()


def test_validation_error_exits_2(tmp_path):
    bad_model = dict(MODEL, m=-1.0)
    code, out = run(tmp_path, "qp-solve", {"model": bad_model})
    assert code == 2


def test_newton_failure_exits_3(tmp_path):
    cfg = {
        "model": {"m": 0.0, "plus_sites": [1], "xi": {"1": 1e-2}, "grid_N": 64,
                  "j_max": 8, "allow_zero_mass": True},
        "nonlinearity": {"leading": False, "hot": [[1.0, 0, "cos", 0, 2, 0]]},
        "solver": {"L": 4, "tol": 1e-12, "max_iter": 20},
    }
    code, out = run(tmp_path, "qp-solve", cfg)
    assert code == 3
    assert not out.exists()


def test_determinism_byte_identical(tmp_path):
    cfg = {"model": dict(MODEL, j_max=24), "scales": [1e-2, 1e-3], "samples": 100,
           "gamma": 1e-2, "seed": 9}
    code1, out1 = run(tmp_path, "melnikov-scan", cfg)
    code2, out2 = run(tmp_path, "melnikov-scan", cfg, "--threads", "2")
    assert code1 == code2 == 0
    assert (out1 / "density.csv").read_bytes() == (out2 / "density.csv").read_bytes()


def test_simulate_and_lyapunov_csv_schema(tmp_path):
    cfg = {"m": 1.0, "grid_N": 64, "T": 1.0, "dt": 0.01, "sample_every": 10,
           "initial": {"type": "modes", "y": [[1, 0.3]], "v": []},
           "nonlinearity": {"leading": True}}
    code, out = run(tmp_path, "simulate", cfg)
    assert code == 0
    header = (out / "trajectory.csv").read_text().splitlines()[1]
    assert header == "t,energy,M,H,mean,meanvel,flag"


def test_algebra_check_all_pass(tmp_path):
    cfg = {"plus_sites": [1, 3], "j_max": 16, "k_max": 8, "d_max": 3,
           "n_monomials": 120, "seed": 2}
    code, out = run(tmp_path, "algebra-check", cfg)
    assert code == 0
    rows = (out / "algebra_check.csv").read_text().strip().splitlines()[2:]
    assert rows and all(r.rsplit(",", 1)[1] == "1" for r in rows)


def test_continuation_csv(tmp_path):
    cfg = {"model": MODEL, "solver": {"L": 6, "tol": 1e-12},
           "xi_path": [{"1": 3e-3}, {"1": 1e-3}]}
    code, out = run(tmp_path, "continuation", cfg)
    assert code == 0
    lines = (out / "continuation.csv").read_text().strip().splitlines()
    assert lines[1] == "xi,omega_1,residual,iters"
    assert len(lines) == 4
