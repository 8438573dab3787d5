"""
Residual families of the per-sweep objective.

Point residuals return Jacobians over (δt, δθ) of the states they touch; the
logical residual returns the full 15x15 Jacobian with respect to x_b.
"""

from typing import Tuple

import numpy as np

from errors import TimestampMismatchError
from geometry import (
    NavState,
    Pose,
    STATE_DIM,
    skew,
    so3_log,
    right_jacobian_inverse,
    left_jacobian_inverse,
)
from geometry.rotation import batch_exp_matrices, batch_right_jacobians, quaternion_left_product_block
from mapping import PlaneFit
from preprocessing import interpolated_lidar_poses


def point_residual(point: np.ndarray, plane: PlaneFit, x_e: NavState, weight: float = 1.0) -> Tuple[float, np.ndarray]:
    """Signed point-to-plane distance of an end-frame point, with its 1x6 Jacobian over (δt_e, δθ_e)"""
    point = np.asarray(point, dtype=float).reshape(3)
    world = x_e.rotation.apply(point) + x_e.translation
    residual = weight * (plane.normal @ world + plane.offset)
    jacobian = np.zeros((1, 6))
    jacobian[0, 0:3] = weight * plane.normal
    jacobian[0, 3:6] = -weight * plane.normal @ x_e.rotation.matrix @ skew(point)
    return float(residual), jacobian


def point_residuals(points: np.ndarray, normals: np.ndarray, offsets: np.ndarray, weights: np.ndarray,
                    x_e: NavState, jacobians: bool = True):
    """Vectorized point_residual over (n, 3) end-frame points"""
    R = x_e.rotation.matrix
    world = points @ R.T + x_e.translation
    residuals = weights * (np.einsum("nd,nd->n", normals, world) + offsets)
    if not jacobians:
        return residuals, None
    J = np.zeros((points.shape[0], 6))
    J[:, 0:3] = weights[:, None] * normals
    # nᵀ R [p]× as a row equals (Rᵀn × p)ᵀ
    J[:, 3:6] = -weights[:, None] * np.cross(normals @ R, points)
    return residuals, J


def elastic_point_residuals(points: np.ndarray, alphas: np.ndarray, normals: np.ndarray, offsets: np.ndarray,
                            weights: np.ndarray, x_b: NavState, x_e: NavState, extrinsic: Pose,
                            jacobians: bool = True):
    """Point-to-plane residuals of sensor-frame points placed with per-point interpolated LiDAR poses.

    Returns (residuals, J_b, J_e), both Jacobians over (δt, δθ) of their state.
    """
    rotations, translations = interpolated_lidar_poses(x_b, x_e, extrinsic, alphas)
    world = np.einsum("nij,nj->ni", rotations, points) + translations
    residuals = weights * (np.einsum("nd,nd->n", normals, world) + offsets)
    if not jacobians:
        return residuals, None, None

    R_E = extrinsic.rotation.matrix
    t_E = extrinsic.translation
    phi = so3_log((x_b.rotation * extrinsic.rotation).inverse() * (x_e.rotation * extrinsic.rotation))
    scaled = alphas[:, None] * phi
    Jr_scaled = batch_right_jacobians(scaled)
    partial = batch_exp_matrices(scaled)

    # d(world)/du for a right perturbation u of the interpolated rotation
    row = -weights[:, None] * np.cross(np.einsum("nij,ni->nj", rotations, normals), points)

    to_begin = (np.transpose(partial, (0, 2, 1))
                - alphas[:, None, None] * Jr_scaled @ left_jacobian_inverse(phi)) @ R_E.T
    to_end = alphas[:, None, None] * Jr_scaled @ right_jacobian_inverse(phi) @ R_E.T

    lever_b = -(normals @ x_b.rotation.matrix) @ skew(t_E)
    lever_e = -(normals @ x_e.rotation.matrix) @ skew(t_E)

    J_b = np.zeros((points.shape[0], 6))
    J_e = np.zeros((points.shape[0], 6))
    J_b[:, 0:3] = (weights * (1.0 - alphas))[:, None] * normals
    J_e[:, 0:3] = (weights * alphas)[:, None] * normals
    J_b[:, 3:6] = np.einsum("ni,nij->nj", row, to_begin) + (weights * (1.0 - alphas))[:, None] * lever_b
    J_e[:, 3:6] = np.einsum("ni,nij->nj", row, to_end) + (weights * alphas)[:, None] * lever_e
    return residuals, J_b, J_e


def logical_residual(x_b: NavState, x_prev_end: NavState, tolerance: float = 1e-9) -> Tuple[np.ndarray, np.ndarray]:
    """Consistency between the begin state and the previous end state that shares its timestamp"""
    if abs(x_b.timestamp - x_prev_end.timestamp) > tolerance:
        raise TimestampMismatchError(
            f"Begin state at {x_b.timestamp:.9f} does not share the previous end time {x_prev_end.timestamp:.9f}"
        )
    error = x_prev_end.rotation.inverse() * x_b.rotation
    r = np.zeros(STATE_DIM)
    r[0:3] = x_b.translation - x_prev_end.translation
    r[3:6] = 2.0 * error.vec
    r[6:9] = x_b.velocity - x_prev_end.velocity
    r[9:12] = x_b.accel_bias - x_prev_end.accel_bias
    r[12:15] = x_b.gyro_bias - x_prev_end.gyro_bias

    J = np.eye(STATE_DIM)
    J[3:6, 3:6] = quaternion_left_product_block(error)
    return r, J
