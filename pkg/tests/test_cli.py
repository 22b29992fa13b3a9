import csv
import json

import numpy as np
import pytest

from bearingtma import cli
from bearingtma.config import bundled_path, load_scenario
from bearingtma.kinematics import sample_times

NOISELESS_CFG = """
[scenario]
name = noiseless_accel
t_start = 0
t_end = 1200
dt = 20
seed = 5
initial_range_class = small

[observer]
legs = 45:8:600, 135:8:600

[target]
model = accelerated
initial_bearing_deg = 20
vx = -4
vy = 1
ax = 0.004
ay = -0.002

[sensing]
sigma_deg = 0

[estimation]
basis = legendre
degree = 2
"""


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _col(rows, name):
    return np.array([float(r[name]) for r in rows])


@pytest.fixture
def noiseless_cfg(tmp_path):
    p = tmp_path / "noiseless.cfg"
    p.write_text(NOISELESS_CFG)
    return p


def test_simulate_contract(tmp_path):
    out = tmp_path / "sim"
    assert cli.main(["simulate", "--scenario", "figure1_accel_big", "--out-dir", str(out)]) == 0
    obs = _read(out / "observations.csv")
    truth = _read(out / "truth.csv")
    n = len(sample_times(load_scenario("figure1_accel_big")))
    assert len(obs) == len(truth) == n
    assert list(obs[0]) == cli.OBS_COLUMNS
    assert list(truth[0]) == cli.TRUTH_COLUMNS
    raw = (out / "observations.csv").read_bytes()
    assert b"\r" not in raw


def test_simulate_deterministic_and_seed_override(tmp_path):
    args = ["simulate", "--scenario", "figure2_accel_small", "--seed", "7"]
    cli.main(args + ["--out-dir", str(tmp_path / "a")])
    cli.main(args + ["--out-dir", str(tmp_path / "b")])
    cli.main(["simulate", "--scenario", "figure2_accel_small", "--seed", "8", "--out-dir", str(tmp_path / "c")])
    for f in ("observations.csv", "truth.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    assert (tmp_path / "a" / "observations.csv").read_bytes() != (tmp_path / "c" / "observations.csv").read_bytes()


def test_csv_round_trip_exact(tmp_path):
    from bearingtma.sensing import observe, run_rng

    cli.main(["simulate", "--scenario", "figure3_parabola_average", "--out-dir", str(tmp_path)])
    series = cli.read_observations(tmp_path / "observations.csv")
    s = load_scenario("figure3_parabola_average")
    ref, _ = observe(s, run_rng(s.seed, 0))
    np.testing.assert_array_equal(series.beta, ref.beta)
    np.testing.assert_array_equal(series.obs_x, ref.obs_x)
    assert series.sigma == ref.sigma


def test_bad_dt(tmp_path, capsys):
    text = bundled_path("figure1_accel_big").read_text().replace("dt = 10", "dt = 0")
    p = tmp_path / "bad.cfg"
    p.write_text(text)
    code = cli.main(["simulate", "--scenario", str(p), "--out-dir", str(tmp_path)])
    assert code == cli.EXIT_CONFIG
    assert "dt" in capsys.readouterr().err


def test_bad_target_model(tmp_path, capsys):
    text = bundled_path("figure1_accel_big").read_text().replace("model = accelerated", "model = zigzag")
    p = tmp_path / "bad.cfg"
    p.write_text(text)
    assert cli.main(["simulate", "--scenario", str(p), "--out-dir", str(tmp_path)]) == cli.EXIT_CONFIG
    assert "target.model" in capsys.readouterr().err


def test_pipeline_exact_recovery(tmp_path, noiseless_cfg):
    cli.main(["simulate", "--scenario", str(noiseless_cfg), "--out-dir", str(tmp_path)])
    code = cli.main(["estimate", "--observations", str(tmp_path / "observations.csv"),
                     "--degree", "2", "--out-dir", str(tmp_path)])
    assert code == 0
    track = _read(tmp_path / "predicted_track.csv")
    truth = _read(tmp_path / "truth.csv")
    assert list(track[0]) == cli.TRACK_COLUMNS
    err = np.hypot(_col(track, "x") - _col(truth, "tgt_x"), _col(track, "y") - _col(truth, "tgt_y"))
    assert err.max() <= 1e-6
    verr = np.hypot(_col(track, "vx") - _col(truth, "tgt_vx"), _col(track, "vy") - _col(truth, "tgt_vy"))
    assert verr.max() <= 1e-6
    report = json.loads((tmp_path / "estimate.json").read_text())
    assert report["degree"] == 2 and len(report["coeffs_x"]) == 3


def test_estimate_prints_diagnostics(tmp_path, noiseless_cfg, capsys):
    cli.main(["simulate", "--scenario", str(noiseless_cfg), "--out-dir", str(tmp_path)])
    capsys.readouterr()
    cli.main(["estimate", "--observations", str(tmp_path / "observations.csv"), "--refine",
              "--out-dir", str(tmp_path)])
    out = capsys.readouterr().out
    for key in ("coeffs_x", "coeffs_y", "condition_number", "residual_rms_m", "stderr_x_m", "stderr_y_m", "refined"):
        assert key in out


def test_bases_agree(tmp_path):
    cli.main(["simulate", "--scenario", "figure2_accel_small", "--out-dir", str(tmp_path)])
    tracks = []
    for basis in ("cheb1", "legendre", "cheb2"):
        d = tmp_path / basis
        cli.main(["estimate", "--observations", str(tmp_path / "observations.csv"), "--basis", basis,
                  "--out-dir", str(d)])
        rows = _read(d / "predicted_track.csv")
        tracks.append(np.column_stack([_col(rows, "x"), _col(rows, "y")]))
    for t in tracks[1:]:
        assert np.max(np.abs(t - tracks[0])) <= 1e-6


@pytest.mark.parametrize("argv", [
    ["estimate", "--observations", "x.csv", "--degree", "-1"],
    ["estimate", "--observations", "x.csv", "--basis", "hermite"],
    ["compare", "--scenario", "figure1_accel_big", "--runs", "0"],
    ["frobnicate"],
])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == cli.EXIT_USAGE


def test_unobservable_exit_code(tmp_path, capsys):
    p = tmp_path / "obs.csv"
    t = np.arange(30) * 10.0
    ox, oy = 5.0 * t, 5.0 * t
    tx, ty = 2000.0 - 3.0 * t, 6000.0 + 1.0 * t
    beta = np.arctan2(tx - ox, ty - oy)
    cli.write_csv(p, cli.OBS_COLUMNS, zip(t, ox, oy, beta, np.zeros(30)))
    code = cli.main(["estimate", "--observations", str(p), "--method", "nbearings", "--out-dir", str(tmp_path)])
    assert code == cli.EXIT_UNOBSERVABLE
    assert "condition number" in capsys.readouterr().err


def test_data_and_io_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,obs_x\n1,2\n")
    assert cli.main(["estimate", "--observations", str(bad), "--out-dir", str(tmp_path)]) == cli.EXIT_DATA
    bad.write_text("t,obs_x,obs_y,bearing_rad,sigma_rad\n0,0,0,abc,0\n")
    assert cli.main(["estimate", "--observations", str(bad), "--out-dir", str(tmp_path)]) == cli.EXIT_DATA
    missing = tmp_path / "nope.csv"
    assert cli.main(["estimate", "--observations", str(missing), "--out-dir", str(tmp_path)]) == cli.EXIT_IO
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = cli.main(["simulate", "--scenario", "figure1_accel_big", "--out-dir", str(blocker / "sub")])
    assert code == cli.EXIT_IO


def test_compare_outputs_and_regression(tmp_path):
    out = tmp_path / "cmp"
    code = cli.main(["compare", "--scenario", "figure1_accel_big", "--runs", "1000", "--seed", "42",
                     "--out-dir", str(out)])
    assert code == 0
    n = len(sample_times(load_scenario("figure1_accel_big")))
    nb = _read(out / "report_nbearings.csv")
    npoly = _read(out / "report_npoly-cheb1-d2.csv")
    assert len(nb) == len(npoly) == n
    assert list(nb[0]) == cli.REPORT_COLUMNS
    assert float(npoly[-1]["rmse_pos_err"]) < float(nb[-1]["rmse_pos_err"])
    comp = _read(out / "comparison.csv")
    assert len(comp) == 3 * n
    assert "ratio_nbearings_over_npoly-cheb1-d2" in comp[0]
    dat = (out / "plot_figure1_accel_big.dat").read_text().splitlines()
    assert dat[0].startswith("#") and len(dat) == n + 1
    assert len(dat[1].split()) == 3
    assert (out / "plot_figure1_accel_big.gp").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["master_seed"] == 42
    assert manifest["scenarios"][0]["digest_sha256"]
    assert set(manifest["outputs"]) >= {"report_nbearings.csv", "comparison.csv"}


def test_compare_single_run_percentiles(tmp_path):
    cli.main(["compare", "--scenario", "figure2_accel_small", "--runs", "1", "--out-dir", str(tmp_path)])
    for row in _read(tmp_path / "report_nbearings.csv"):
        assert row["p5"] == row["median"] == row["p95"] == row["mean_pos_err"]


def test_compare_deterministic_across_threads(tmp_path):
    base = ["compare", "--scenario", "figure3_parabola_average", "--runs", "100",
            "--method", "name=nbearings", "--method", "name=npoly,basis=legendre,degree=2",
            "--method", "name=npoly,degree=2,refine=1"]
    cli.main(base + ["--threads", "1", "--out-dir", str(tmp_path / "a")])
    cli.main(base + ["--threads", "3", "--out-dir", str(tmp_path / "b")])
    files = sorted(p.name for p in (tmp_path / "a").glob("*.csv"))
    assert len(files) == 4
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_compare_all_failed_method(tmp_path, capsys):
    cfg = NOISELESS_CFG.replace("legs = 45:8:600, 135:8:600", "legs = 45:8:1200").replace(
        "model = accelerated", "model = uniform")
    p = tmp_path / "single.cfg"
    p.write_text(cfg)
    with pytest.warns(UserWarning, match="single uniform leg"):
        code = cli.main(["compare", "--scenario", str(p), "--runs", "3", "--method", "name=nbearings",
                         "--method", "name=npoly,degree=0", "--out-dir", str(tmp_path / "o")])
    assert code == 0
    assert "failed on all" in capsys.readouterr().err
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["scenarios"][0]["all_failed"] == ["nbearings"]


def test_compare_multiple_scenarios(tmp_path):
    cli.main(["compare", "--scenario", "figure1_accel_big", "--scenario", "figure2_accel_small",
              "--runs", "5", "--out-dir", str(tmp_path)])
    assert (tmp_path / "figure1_accel_big" / "comparison.csv").exists()
    assert (tmp_path / "figure2_accel_small" / "comparison.csv").exists()
    assert len(json.loads((tmp_path / "manifest.json").read_text())["scenarios"]) == 2


def test_sweep_initial_range_cardinality(tmp_path):
    code = cli.main(["sweep", "--scenario", "figure1_accel_big", "--param", "initial_range",
                     "--values", "5000,15000,30000", "--runs", "5", "--out-dir", str(tmp_path)])
    assert code == 0
    rows = _read(tmp_path / "sweep_initial_range.csv")
    n = len(sample_times(load_scenario("figure1_accel_big")))
    assert len(rows) == 3 * 2 * n
    assert {r["param_value"] for r in rows} == {"5000.0", "15000.0", "30000.0"}


def test_sweep_noiseless(tmp_path):
    cli.main(["sweep", "--scenario", "figure2_accel_small", "--param", "sigma_deg", "--values", "0",
              "--runs", "3", "--method", "name=npoly,degree=2", "--out-dir", str(tmp_path)])
    rows = _read(tmp_path / "sweep_sigma_deg.csv")
    assert max(float(r["mean_pos_err"]) for r in rows) <= 1e-6


def test_sweep_degree(tmp_path):
    cli.main(["sweep", "--scenario", "figure2_accel_small", "--param", "degree", "--values", "1,2,3",
              "--runs", "300", "--method", "name=npoly", "--out-dir", str(tmp_path)])
    rows = _read(tmp_path / "sweep_degree.csv")
    final = {}
    for r in rows:
        final[r["param_value"]] = float(r["rmse_pos_err"])  # last row per cell is the final time
    assert final["2"] <= final["1"]


def test_sweep_n_obs(tmp_path):
    cli.main(["sweep", "--scenario", "figure2_accel_small", "--param", "n_obs", "--values", "30,60",
              "--runs", "2", "--out-dir", str(tmp_path)])
    rows = _read(tmp_path / "sweep_n_obs.csv")
    assert len(rows) == 2 * (30 + 60)


def test_sweep_unknown_param(tmp_path, capsys):
    code = cli.main(["sweep", "--scenario", "figure1_accel_big", "--param", "wind", "--values", "1",
                     "--out-dir", str(tmp_path)])
    assert code == cli.EXIT_USAGE
    err = capsys.readouterr().err
    for name in cli.SWEEP_PARAMS:
        assert name in err


def test_method_spec_errors(tmp_path):
    code = cli.main(["compare", "--scenario", "figure1_accel_big", "--runs", "1",
                     "--method", "name=npoly,degree=99", "--out-dir", str(tmp_path)])
    assert code == cli.EXIT_CONFIG
    code = cli.main(["compare", "--scenario", "figure1_accel_big", "--runs", "1",
                     "--method", "name=npoly,colour=red", "--out-dir", str(tmp_path)])
    assert code == cli.EXIT_CONFIG


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "bearingtma", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "bearingtma" in res.stdout
