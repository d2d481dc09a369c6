"""CLI surface: subcommands, reports, exit codes, determinism."""

import json
import math

import pytest

from dzeta.cli import RunConfig, run_command


def load(path):
    with open(path) as fh:
        return json.load(fh)


def test_field_report(tmp_path):
    out = tmp_path / "f.json"
    assert run_command(["field", "--field", "-1", "--out", str(out)]) == 0
    rep = load(out)
    assert rep["schema"] == 1
    assert rep["results"]["d_K"] == -4
    assert rep["results"]["h"] == 1
    assert set(rep["results"]) == {"d", "d_K", "r1", "r2", "n", "eta", "w",
                                   "h", "R", "hR", "L1"}


def test_field_rational(tmp_path):
    out = tmp_path / "q.json"
    assert run_command(["field", "--field", "Q", "--out", str(out)]) == 0
    assert load(out)["results"]["d"] is None


def test_kernel_eval_report(tmp_path):
    out = tmp_path / "k.json"
    code = run_command(["kernel", "eval", "--r1", "2", "--r2", "0",
                        "--x", "0.5", "--abscissa", "-0.25", "--out", str(out)])
    assert code == 0
    rep = load(out)
    res = rep["results"]
    assert set(res) >= {"value", "err_est", "method"}
    # 4(K0(1) + gamma - log 2) from the closed Bessel form
    expected = 4 * (0.4210244382407084 + 0.5772156649015329 - math.log(2.0))
    assert abs(res["value"] - expected) < 1e-8
    assert res["err_est"] < 1e-8


def test_coeffs_csv(tmp_path):
    out = tmp_path / "c.json"
    csv_path = tmp_path / "c.csv"
    code = run_command(["coeffs", "--field", "5", "--coeff-bound", "500",
                        "--csv", str(csv_path), "--out", str(out)])
    assert code == 0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "n,a_n,b_n,M_K(n),m_K(n)"
    assert len(lines) == 501
    assert load(out)["results"]["head"]["b"][0] == 1


def test_zeros_scan(tmp_path):
    out = tmp_path / "z.json"
    csv_path = tmp_path / "z.csv"
    code = run_command(["zeros", "scan", "--field", "Q", "--T", "30",
                        "--csv", str(csv_path), "--out", str(out)])
    assert code == 0
    rep = load(out)
    assert rep["results"]["count"] == 3
    assert rep["results"]["counts_agree"]
    assert len(csv_path.read_text().strip().splitlines()) == 4


def test_verify_modular_small(tmp_path):
    out = tmp_path / "v.json"
    csv_path = tmp_path / "v.csv"
    code = run_command(["verify-modular", "--field", "Q", "--alpha", "1",
                        "--T", "32", "--N", "50000",
                        "--csv", str(csv_path), "--out", str(out)])
    assert code == 0
    rep = load(out)
    assert rep["results"]["passed"]
    assert rep["results"]["truncation"]["N_terms"] == 50000
    assert csv_path.read_text().splitlines()[0] == "bracket_id,gamma_end,zero_partial"


def test_riesz_scan_command(tmp_path):
    out = tmp_path / "r.json"
    code = run_command(["riesz-scan", "--field", "Q", "--coeff-bound", "20000",
                        "--y-min", "1e2", "--y-max", "1e5", "--points", "10",
                        "--out", str(out)])
    assert code == 0
    rep = load(out)
    assert rep["results"]["main_term_zero"]
    assert len(rep["results"]["P"]) == 10


def test_mellin_check_command(tmp_path):
    out = tmp_path / "m.json"
    code = run_command(["mellin-check", "--field", "Q", "--s", "0.25",
                        "--coeff-bound", "200000", "--out", str(out)])
    assert code == 0
    rep = load(out)
    assert rep["results"]["rel_discrepancy"] <= 1e-3


def test_selftest_and_determinism(tmp_path):
    out1 = tmp_path / "s.json"
    assert run_command(["selftest", "--out", str(out1)]) == 0
    blob1 = out1.read_bytes()
    assert run_command(["selftest", "--out", str(out1)]) == 0
    assert out1.read_bytes() == blob1
    rep = json.loads(blob1)
    assert rep["results"]["all_passed"]
    assert all("achieved" in c and "target" in c for c in rep["results"]["checks"])


def test_usage_errors():
    assert run_command(["field", "--field", "12"]) == 1          # not squarefree
    assert run_command(["riesz-scan", "--field", "5"]) == 1      # missing bound
    assert run_command(["verify-modular", "--field", "Q"]) == 1  # missing alpha
    assert run_command(["no-such-command"]) == 1


def test_invalid_budget_errors(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"T": -5.0}))
    assert run_command(["--config", str(cfg), "zeros", "scan",
                        "--field", "Q", "--T", "-5"]) == 1


def test_config_file_round_trip(tmp_path):
    cfg = RunConfig(field="5", N=1234, T=17.0, c0=0.02, eps=0.2)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    loaded = RunConfig.from_dict(json.loads(path.read_text()))
    assert loaded == cfg


def test_config_file_feeds_commands(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"field": "-1", "T": 12.0}))
    out = tmp_path / "z.json"
    code = run_command(["--config", str(cfg_path), "zeros", "scan",
                        "--field", "-1", "--T", "12", "--out", str(out)])
    assert code == 0
    assert load(out)["config"]["T"] == 12.0


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError):
        RunConfig.from_dict({"no_such_key": 1})


def test_threads_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("DZETA_THREADS", "2")
    out = tmp_path / "z.json"
    assert run_command(["zeros", "scan", "--field", "Q", "--T", "20",
                        "--out", str(out)]) == 0
    assert load(out)["config"]["threads"] == 2
