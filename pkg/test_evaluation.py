# test_evaluation.py

import numpy as np
import pytest

from errors import FileFormatError, OverlapError
from evaluation import (
    Trajectory,
    align_rigid,
    associate,
    ate_rmse,
    consistency_report,
    format_report,
    format_table,
    read_speed_csv,
    read_trajectory,
    speed_csv,
    velocity_smoothness,
    write_states,
    write_trajectory,
    zigzag_score,
)
from geometry import NavState, so3_exp


def _helix(n=50, t0=0.0):
    t = t0 + np.linspace(0.0, 5.0, n)
    positions = np.column_stack([np.cos(t), np.sin(t), 0.2 * t])
    quaternions = np.array([so3_exp([0.0, 0.0, a]).quaternion for a in t])
    return Trajectory(t, positions, quaternions)


def test_identical_trajectories_have_zero_error():
    gt = _helix()
    assert ate_rmse(gt, gt) == pytest.approx(0.0, abs=1e-12)
    assert ate_rmse(gt, gt, align=False) == 0.0


def test_alignment_removes_a_rigid_offset():
    gt = _helix()
    R = so3_exp([0.1, -0.3, 0.7]).matrix
    t = np.array([3.0, -1.0, 0.5])
    moved = Trajectory(gt.timestamps, gt.positions @ R.T + t, gt.quaternions)
    R_est, t_est = align_rigid(gt.positions, moved.positions)
    assert np.allclose(R_est, R, atol=1e-9)
    assert np.allclose(t_est, t, atol=1e-9)
    assert ate_rmse(moved, gt) < 1e-9
    assert ate_rmse(moved, gt, align=False) > 1.0


def test_alignment_keeps_a_proper_rotation(rng):
    source = rng.normal(size=(20, 3))
    mirrored = source * np.array([1.0, 1.0, -1.0])
    R, _ = align_rigid(source, mirrored)
    assert np.linalg.det(R) == pytest.approx(1.0)


def test_association_interpolates_ground_truth():
    gt = _helix(n=501)
    est = Trajectory(gt.timestamps[5:-5:7] + 0.003, gt.positions[5:-5:7], gt.quaternions[5:-5:7])
    est_positions, gt_positions = associate(est, gt)
    assert est_positions.shape == gt_positions.shape == (len(est), 3)
    assert np.max(np.linalg.norm(est_positions - gt_positions, axis=1)) < 0.01


def test_disjoint_time_ranges_raise():
    with pytest.raises(OverlapError):
        ate_rmse(_helix(t0=100.0), _helix())


def test_velocity_smoothness():
    assert velocity_smoothness(np.array([1.0, 2.0, 3.0, 4.0])) == 0.0
    assert velocity_smoothness(np.array([1.0, 2.0, 1.0, 2.0])) == pytest.approx(4.0)
    states = [NavState.at_rest(float(k)).replace(velocity=np.array([k % 2, 0.0, 0.0])) for k in range(4)]
    assert velocity_smoothness(states) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        velocity_smoothness(np.array([1.0, 2.0]))


def test_zigzag_score():
    straight = np.column_stack([np.arange(5.0), np.zeros(5), np.zeros(5)])
    assert zigzag_score(straight) == pytest.approx(0.0)
    zigzag = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 0.0], [2.0, 0.0, 0.0], [3.0, 1.0, 0.0]])
    assert zigzag_score(zigzag) == pytest.approx(np.pi / 2)
    assert zigzag_score(np.zeros((4, 3))) == 0.0
    with pytest.raises(ValueError):
        zigzag_score(straight[:2])


def test_trajectory_file_roundtrip(tmp_path):
    gt = _helix(n=10)
    path = write_trajectory(tmp_path / "out" / "gt.txt", gt)
    first = path.read_text().splitlines()[0].split()
    assert len(first) == 8
    assert float(first[-1]) == pytest.approx(gt.quaternions[0, 0])
    loaded = read_trajectory(path)
    assert np.allclose(loaded.positions, gt.positions, atol=1e-9)
    assert np.allclose(loaded.quaternions, gt.quaternions, atol=1e-9)


def test_reader_skips_comments_and_blank_lines(tmp_path):
    path = tmp_path / "traj.txt"
    path.write_text("# t tx ty tz qx qy qz qw\n\n0.0 1 2 3 0 0 0 1\n0.1 1 2 3 0 0 0 1\n")
    assert len(read_trajectory(path)) == 2


@pytest.mark.parametrize("text", [
    "",
    "0.0 1 2 3 0 0 0\n",
    "0.0 1 2 3 0 0 0 one\n",
    "0.1 1 2 3 0 0 0 1\n0.0 1 2 3 0 0 0 1\n",
])
def test_reader_rejects_malformed_files(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(FileFormatError):
        read_trajectory(path)


def test_missing_trajectory_file(tmp_path):
    with pytest.raises(FileFormatError):
        read_trajectory(tmp_path / "absent.txt")


def test_write_states_allows_repeated_timestamps(tmp_path):
    a = NavState.at_rest(1.0)
    b = a.replace(translation=np.array([0.1, 0.0, 0.0]))
    lines = write_states(tmp_path / "full.txt", [a, b]).read_text().splitlines()
    assert len(lines) == 2
    assert lines[0].split()[0] == lines[1].split()[0] == "1.000000000"


def test_report_formatting():
    gt = _helix()
    report = consistency_report(gt, gt)
    assert set(report) == {"ate_rmse", "velocity_smoothness", "zigzag_score", "samples"}
    text = format_report(report)
    assert text.splitlines()[0] == "ate_rmse=0.000000"
    assert "samples=50" in text
    table = format_table([dict(report, mode="semi-elastic")])
    assert table.splitlines()[0] == "mode ate_rmse velocity_smoothness zigzag_score samples"
    assert table.splitlines()[1].startswith("semi-elastic 0.000000")


def test_speed_csv(tmp_path):
    states = [NavState.at_rest(0.1 * k).replace(velocity=np.array([3.0, 4.0, 0.0])) for k in range(3)]
    data = read_speed_csv(speed_csv(states, tmp_path / "speed.csv"))
    assert data.shape == (3, 2)
    assert np.allclose(data[:, 1], 5.0)
    (tmp_path / "bad.csv").write_text("t,speed,extra\n0,1,2\n")
    with pytest.raises(FileFormatError):
        read_speed_csv(tmp_path / "bad.csv")
