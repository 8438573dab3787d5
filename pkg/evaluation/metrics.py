from typing import Sequence, Tuple, Union

import numpy as np

from errors import OverlapError
from geometry import NavState
from .trajectory import MAX_EXTRAPOLATION, Trajectory


def align_rigid(source: np.ndarray, target: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Least-squares R, t (no scale) such that R·source + t ≈ target"""
    source = np.asarray(source, dtype=float)
    target = np.asarray(target, dtype=float)
    mu_s = source.mean(axis=0)
    mu_t = target.mean(axis=0)
    U, _, Vt = np.linalg.svd((target - mu_t).T @ (source - mu_s))
    correction = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt)) or 1.0])
    R = U @ correction @ Vt
    return R, mu_t - R @ mu_s


def associate(est: Trajectory, gt: Trajectory,
              max_extrapolation: float = MAX_EXTRAPOLATION) -> Tuple[np.ndarray, np.ndarray]:
    """Estimated positions and time-interpolated ground truth at the estimate timestamps"""
    gt_positions, usable = gt.positions_at(est.timestamps, max_extrapolation)
    if np.count_nonzero(usable) < 2:
        raise OverlapError(
            f"Only {np.count_nonzero(usable)} estimate samples overlap ground truth "
            f"[{gt.timestamps[0]:.3f}, {gt.timestamps[-1]:.3f}]"
        )
    return est.positions[usable], gt_positions[usable]


def ate_rmse(est: Trajectory, gt: Trajectory, align: bool = True) -> float:
    """Root mean square translational error, optionally after rigid alignment"""
    est_positions, gt_positions = associate(est, gt)
    if align:
        R, t = align_rigid(est_positions, gt_positions)
        est_positions = est_positions @ R.T + t
    errors = np.linalg.norm(est_positions - gt_positions, axis=1)
    return float(np.sqrt(np.mean(errors ** 2)))


def _speeds(series: Union[Sequence[NavState], Trajectory, np.ndarray]) -> np.ndarray:
    if isinstance(series, Trajectory):
        return series.speeds()
    if len(series) and isinstance(series[0], NavState):
        return np.array([np.linalg.norm(s.velocity) for s in series])
    return np.asarray(series, dtype=float).reshape(-1)


def velocity_smoothness(states: Union[Sequence[NavState], Trajectory, np.ndarray]) -> float:
    """Mean squared second difference of speed across consecutive sweep-end states"""
    speeds = _speeds(states)
    if speeds.size < 3:
        raise ValueError(f"velocity_smoothness needs at least 3 samples, got {speeds.size}")
    return float(np.mean(np.diff(speeds, n=2) ** 2))


def zigzag_score(trajectory: Union[Trajectory, np.ndarray]) -> float:
    """Length-weighted mean turning angle (rad) between consecutive translation increments"""
    positions = trajectory.positions if isinstance(trajectory, Trajectory) else np.asarray(trajectory, float)
    if positions.shape[0] < 3:
        raise ValueError(f"zigzag_score needs at least 3 poses, got {positions.shape[0]}")
    steps = np.diff(positions, axis=0)
    first, second = steps[:-1], steps[1:]
    angles = np.arctan2(np.linalg.norm(np.cross(first, second), axis=1), np.einsum("nd,nd->n", first, second))
    weights = np.linalg.norm(first, axis=1) + np.linalg.norm(second, axis=1)
    if weights.sum() <= 0.0:
        return 0.0
    return float(np.sum(weights * angles) / np.sum(weights))
