"""
Motion-distortion calibration of a sweep.

Both variants return the sweep re-expressed in the IMU frame at t_end, with
every point keeping its original timestamp. The uniform variant interpolates
between the begin/end LiDAR poses; the IMU variant integrates the inertial
stream from the begin state up to each point timestamp.
"""

import logging
from typing import Sequence, Tuple

import numpy as np

from errors import NonFiniteStateError, TimestampMismatchError
from geometry import NavState, Pose, so3_log
from geometry.rotation import batch_exp_matrices
from inertial.measurements import ImuSample, check_window
from .sweep import Sweep

logger = logging.getLogger(__name__)


def _require_finite(*states: NavState):
    for state in states:
        if not state.is_finite():
            raise NonFiniteStateError(f"Non-finite state at t={state.timestamp}")


def interpolated_lidar_poses(x_b: NavState, x_e: NavState, extrinsic: Pose,
                             alphas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(N, 3, 3) rotations and (N, 3) translations of the LiDAR at each interpolation factor"""
    lidar_b = x_b.pose * extrinsic
    lidar_e = x_e.pose * extrinsic
    phi = so3_log(lidar_b.rotation.inverse() * lidar_e.rotation)
    alphas = np.asarray(alphas, dtype=float)
    rotations = np.einsum("ij,njk->nik", lidar_b.rotation.matrix, batch_exp_matrices(alphas[:, None] * phi))
    translations = (1.0 - alphas)[:, None] * lidar_b.translation + alphas[:, None] * lidar_e.translation
    return rotations, translations


def _to_end_frame(world: np.ndarray, end_pose: Pose) -> np.ndarray:
    return (world - end_pose.translation) @ end_pose.rotation.matrix


def undistort_uniform(sweep: Sweep, x_b: NavState, x_e: NavState, extrinsic: Pose) -> Sweep:
    """Uniform-motion calibration into the end-of-sweep IMU frame"""
    _require_finite(x_b, x_e)
    if len(sweep) == 0:
        return sweep
    rotations, translations = interpolated_lidar_poses(x_b, x_e, extrinsic, sweep.alphas())
    world = np.einsum("nij,nj->ni", rotations, sweep.points) + translations
    return sweep.with_points(_to_end_frame(world, x_e.pose))


def propagate_imu_poses(samples: Sequence[ImuSample], x_b: NavState, gravity: np.ndarray,
                        query_times: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """IMU poses at arbitrary times inside the window, same midpoint scheme as prediction"""
    g = np.asarray(gravity, dtype=float)
    times = np.array([s.timestamp for s in samples])
    accels = np.array([s.accel for s in samples]) - x_b.accel_bias
    gyros = np.array([s.gyro for s in samples]) - x_b.gyro_bias
    m = len(samples)

    # states at every sample instant
    R = np.empty((m, 3, 3))
    v = np.empty((m, 3))
    p = np.empty((m, 3))
    R[0], v[0], p[0] = x_b.rotation.matrix, x_b.velocity, x_b.translation
    dts = np.diff(times)
    steps = batch_exp_matrices(0.5 * (gyros[:-1] + gyros[1:]) * dts[:, None])
    for n in range(m - 1):
        dt = dts[n]
        R[n + 1] = R[n] @ steps[n]
        f = 0.5 * (R[n] @ accels[n] + R[n + 1] @ accels[n + 1]) - g
        p[n + 1] = p[n] + v[n] * dt + 0.5 * f * dt * dt
        v[n + 1] = v[n] + f * dt

    # partial step from the preceding sample to every query time
    query_times = np.asarray(query_times, dtype=float)
    idx = np.clip(np.searchsorted(times, query_times, side="right") - 1, 0, m - 2)
    tau = query_times - times[idx]
    span = dts[idx]
    s = (tau / span)[:, None]
    accel_q = (1.0 - s) * accels[idx] + s * accels[idx + 1]
    gyro_q = (1.0 - s) * gyros[idx] + s * gyros[idx + 1]
    R_q = np.einsum("nij,njk->nik", R[idx], batch_exp_matrices(0.5 * (gyros[idx] + gyro_q) * tau[:, None]))
    f_q = 0.5 * (np.einsum("nij,nj->ni", R[idx], accels[idx]) + np.einsum("nij,nj->ni", R_q, accel_q)) - g
    t_q = p[idx] + v[idx] * tau[:, None] + 0.5 * f_q * (tau * tau)[:, None]
    return R_q, t_q


def undistort_imu(sweep: Sweep, imu_window: Sequence[ImuSample], x_b: NavState, extrinsic: Pose,
                  gravity: np.ndarray) -> Sweep:
    """IMU-integrated calibration into the end-of-sweep IMU frame"""
    _require_finite(x_b)
    check_window(imu_window, sweep.t_begin, sweep.t_end)
    if abs(imu_window[0].timestamp - x_b.timestamp) > 1e-9:
        raise TimestampMismatchError(
            f"IMU window starts at {imu_window[0].timestamp:.9f}, begin state at {x_b.timestamp:.9f}"
        )
    if len(sweep) == 0:
        return sweep

    query = np.append(np.clip(sweep.timestamps, sweep.t_begin, sweep.t_end), sweep.t_end)
    R_q, t_q = propagate_imu_poses(imu_window, x_b, gravity, query)
    lidar_points = sweep.points @ extrinsic.rotation.matrix.T + extrinsic.translation
    world = np.einsum("nij,nj->ni", R_q[:-1], lidar_points) + t_q[:-1]
    return sweep.with_points((world - t_q[-1]) @ R_q[-1])
