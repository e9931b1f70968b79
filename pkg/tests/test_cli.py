import json

import numpy as np
import pytest

from egflow.cli import EXIT_CONFIG, EXIT_NOT_HYPERBOLIC, EXIT_OK, EXIT_TRUNCATED, eval_number, main, read_config


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


def test_analyze_ricci_n3(capsys):
    code, out = run(capsys, "analyze", "--flow", "ricci_ex", "--n", "3", "--roots", "1,2,3")
    assert code == EXIT_OK
    assert out["discriminant"] == -48.0
    assert out["classification"] == "strictly-hyperbolic"
    np.testing.assert_allclose(out["sigma"], [6, 11, 6])


def test_analyze_reports_not_hyperbolic(capsys):
    code, out = run(capsys, "analyze", "--n", "2", "--tau", "0,2")
    assert code == EXIT_OK
    assert out["classification"] == "not-hyperbolic"


@pytest.mark.parametrize("argv", [
    ["analyze", "--n", "2"],
    ["analyze", "--n", "2", "--tau", "1,2,3"],
    ["analyze", "--flow", "nope", "--tau", "1,2"],
    ["scenario", "not-a-scenario"],
    ["solve", "--grid", "0,1"],
    ["frobnicate"],
])
def test_config_errors(argv, capsys):
    assert main(argv) == EXIT_CONFIG


def test_scenario_writes_files(tmp_path, capsys):
    code, out = run(capsys, "scenario", "cone", "--out", str(tmp_path), "--t-samples", "3")
    assert code == EXIT_OK
    assert set(out) == {"scenario", "classification", "blowup_time", "achieved_t", "metrics", "files"}
    for f in out["files"]:
        assert (tmp_path / f).exists()
    assert all(m["pass"] for m in out["metrics"].values())


def test_solve_from_config_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("grid = 0, 2pi, 128\nt_end = 1\nt_samples = 3\nflow = psi\npsi = 0,1\nlambda0 = sin(x)\n")
    code, out = run(capsys, "solve", "--config", str(cfg), "--t-end", "0.5", "--out", str(tmp_path / "o"))
    assert code == EXIT_OK
    assert out["achieved_t"] == 0.5
    rows = np.loadtxt(tmp_path / "o" / "solve_lambda.csv", delimiter=",", skiprows=1)
    assert rows.shape[1] == 3 and rows[:, 1].max() == 0.5


def test_solve_not_hyperbolic_exit(tmp_path, capsys):
    code = main(["solve", "--grid", "0,6.283185307179586,64", "--t-end", "0.1", "--t-samples", "2",
                 "--flow", "ricci_ex", "--n", "2", "--roots", "sin(x); 0.5*sin(x)"])
    assert code == EXIT_NOT_HYPERBOLIC
    assert "refused" in capsys.readouterr().err


def test_solve_blowup_truncates(tmp_path, capsys):
    out_dir = tmp_path / "o"
    code, out = run(capsys, "solve", "--grid", "0,2pi,200", "--t-end", "2", "--t-samples", "5",
                    "--flow", "psi", "--psi", "0,0,1", "--lambda0", "sin(x)", "--out", str(out_dir))
    assert code == EXIT_TRUNCATED
    assert abs(out["blowup_time"] - 1.0) < 1e-8 and out["achieved_t"] == 0.5
    assert (out_dir / "solve_lambda.csv").exists()


def test_map_with_negative_grid(tmp_path, capsys):
    code, out = run(capsys, "map", "--grid=-6,6,40", "--out", str(tmp_path))
    assert code == EXIT_OK
    assert out["metrics"]["strict_region_vs_discriminant"]["max_abs_err"] == 0
    rows = np.loadtxt(tmp_path / "map_class.csv", delimiter=",", skiprows=1)
    assert rows.shape == (40 * 40, 3)
    assert set(np.unique(rows[:, 2])) <= {0.0, 1.0, 2.0}


def test_set_reaches_any_key(tmp_path, capsys):
    code, out = run(capsys, "scenario", "pseudosphere", "--set", "y_max=5")
    assert code == EXIT_OK
    assert out["metrics"]["gauss_curvature"]["pass"]


def test_eval_number():
    assert eval_number("2pi") == 2 * np.pi
    assert eval_number("-pi/2") == -np.pi / 2
    assert eval_number("1.5") == 1.5
    with pytest.raises(ValueError):
        eval_number("pi+1")


def test_read_config_sections(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[grid]\ngrid = 0,1,10\n[time]\nt_end = 2\n")
    assert read_config(p) == {"grid": "0,1,10", "t_end": "2"}
