# test_cli.py

import json

import numpy as np
import pytest

from cli import build_parser, load_config, main
from cli.commands import DIAGNOSTICS_FILE, FULL_TRAJECTORY_FILE, SPEED_FILE, TRAJECTORY_FILE
from evaluation import read_trajectory

SMALL_RUN = [
    "--set", "rings=8",
    "--set", "azimuth_steps=180",
    "--set", "imu_noise=false",
    "--set", "range_noise=0.0",
]


def _simulate(tmp_path, name="data", trajectory="stationary", duration="3.0", extra=()):
    output = tmp_path / name
    argv = ["simulate", "--output", str(output), "--set", f"trajectory={trajectory}",
            "--set", f"duration={duration}", *SMALL_RUN, *extra]
    assert main(argv) == 0
    return output


@pytest.fixture(scope="module")
def stationary_dataset(tmp_path_factory):
    return _simulate(tmp_path_factory.mktemp("cli"))


def test_print_config(capsys):
    assert main(["print-config", "--mode", "traditional", "--set", "map_capacity=7"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# odometry run configuration (key = value)")
    assert "mode = traditional" in out
    assert "map_capacity = 7" in out


def test_flags_override_config_file(tmp_path):
    config_file = tmp_path / "run.cfg"
    config_file.write_text("# test\nmode = elastic\nseed = 3\nmap_capacity = 9\n")
    args = build_parser().parse_args(["run", "data", "--config", str(config_file), "--seed", "11"])
    config = load_config(args)
    assert (config.mode, config.seed, config.map_capacity) == ("elastic", 11, 9)


def test_logical_sigmas_parse_from_text():
    args = build_parser().parse_args(["run", "data", "--set", "logical_sigmas=0.02, 0.01 0.05 1e-3 1e-4"])
    config = load_config(args)
    assert config.logical_sigmas == (0.02, 0.01, 0.05, 1e-3, 1e-4)
    assert config.estimator_config().logical_sigmas == config.logical_sigmas
    assert main(["print-config", "--set", "logical_sigmas=1 2 3"]) == 1


@pytest.mark.parametrize("argv", [
    ["print-config", "--set", "no_such_key=1"],
    ["print-config", "--set", "missing-equals"],
    ["print-config", "--mode", "rigid"],
    ["run"],
    [],
])
def test_usage_errors_exit_with_one(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err.startswith("error: usage:")


def test_simulate_writes_one_file_per_sweep(tmp_path, capsys):
    output = _simulate(tmp_path, duration="5.0")
    assert capsys.readouterr().out.strip() == f"dataset={output}"
    assert len(list((output / "sweeps").glob("*.csv"))) == 50
    assert (output / "imu.csv").read_text().splitlines()[0] == "t,ax,ay,az,gx,gy,gz"
    assert len(read_trajectory(output / "gt.txt")) == 1001
    assert (output / "config.txt").read_text().startswith("# odometry run configuration")


def test_same_seed_gives_identical_datasets(tmp_path):
    noisy = ["--set", "imu_noise=true", "--set", "range_noise=0.02", "--seed", "5"]
    first = _simulate(tmp_path, "a", trajectory="circular", duration="1.0", extra=noisy)
    second = _simulate(tmp_path, "b", trajectory="circular", duration="1.0", extra=noisy)
    for name in ("imu.csv", "gt.txt", "sweeps/000004.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_missing_imu_log_is_an_alignment_error(tmp_path, capsys):
    dataset = tmp_path / "broken"
    (dataset / "sweeps").mkdir(parents=True)
    (dataset / "sweeps" / "000000.csv").write_text("# t_begin=0.0 t_end=0.1\nx,y,z,t\n1,2,3,0.05\n")
    assert main(["run", str(dataset), "--output", str(tmp_path / "out")]) == 2
    assert capsys.readouterr().err.startswith("error: alignment:")


def test_missing_dataset_directory(tmp_path, capsys):
    assert main(["run", str(tmp_path / "absent"), "--output", str(tmp_path / "out")]) == 2
    assert "error: file_format:" in capsys.readouterr().err


def test_evaluate_identical_trajectories(stationary_dataset, capsys):
    gt = str(stationary_dataset / "gt.txt")
    assert main(["evaluate", gt, gt]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "ate_rmse=0.000000"
    assert {line.split("=")[0] for line in lines} == {"ate_rmse", "velocity_smoothness", "zigzag_score", "samples"}


def test_evaluate_without_overlap(tmp_path, capsys):
    est = tmp_path / "est.txt"
    gt = tmp_path / "gt.txt"
    est.write_text("100.0 0 0 0 0 0 0 1\n100.1 0 0 0 0 0 0 1\n100.2 0 0 0 0 0 0 1\n")
    gt.write_text("0.0 0 0 0 0 0 0 1\n0.1 0 0 0 0 0 0 1\n0.2 0 0 0 0 0 0 1\n")
    assert main(["evaluate", str(est), str(gt)]) == 2
    assert capsys.readouterr().err.startswith("error: overlap:")


@pytest.mark.parametrize("mode", ["semi-elastic", "traditional"])
def test_stationary_run_stays_at_the_origin(stationary_dataset, tmp_path, capsys, mode):
    output = tmp_path / mode
    assert main(["run", str(stationary_dataset), "--output", str(output), "--mode", mode, *SMALL_RUN]) == 0
    summary = capsys.readouterr().out.strip()
    assert summary.startswith(f"mode={mode} sweeps=20 fallback=0")

    trajectory = read_trajectory(output / TRAJECTORY_FILE)
    assert len(trajectory) == 20
    assert np.max(np.abs(trajectory.positions)) < 1e-6
    assert len((output / FULL_TRAJECTORY_FILE).read_text().splitlines()) == 40
    assert (output / SPEED_FILE).read_text().startswith("t,speed")

    records = [json.loads(line) for line in (output / DIAGNOSTICS_FILE).read_text().splitlines()]
    assert records[0]["status"] == "bootstrap"
    assert {r["status"] for r in records[1:]} == {"optimized"}
    assert all(r["total_elapsed"] >= r["register_elapsed"] > 0.0 for r in records)
    if mode == "traditional":
        assert all(r["begin_gap"] == 0.0 for r in records)


def test_run_trajectories_are_reproducible(stationary_dataset, tmp_path):
    for name in ("first", "second"):
        assert main(["run", str(stationary_dataset), "--output", str(tmp_path / name), *SMALL_RUN]) == 0
    assert (tmp_path / "first" / TRAJECTORY_FILE).read_bytes() == (tmp_path / "second" / TRAJECTORY_FILE).read_bytes()


@pytest.mark.slow
def test_ablate_reports_every_mode(stationary_dataset, tmp_path, capsys):
    assert main(["ablate", str(stationary_dataset), "--output", str(tmp_path / "ablation"), *SMALL_RUN]) == 0
    table = capsys.readouterr().out.splitlines()
    assert table[0].split() == ["mode", "ate_rmse", "velocity_smoothness", "zigzag_score", "samples"]
    assert sorted(row.split()[0] for row in table[1:]) == ["elastic", "semi-elastic", "traditional"]
    for mode in ("elastic", "semi-elastic", "traditional"):
        assert (tmp_path / "ablation" / mode / TRAJECTORY_FILE).exists()

