"""
SO(3) algebra on unit quaternions stored as (w, x, y, z).

All rotations are kept in canonical form (w >= 0), so two Rotation objects
describing the same attitude hold the same four numbers.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np
from scipy.spatial.transform import Rotation as ScipyRotation

SMALL_ANGLE = 1e-8


def skew(v: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix such that skew(a) @ b == cross(a, b)"""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def quat_multiply(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product p ⊗ q for (w, x, y, z) arrays"""
    pw, px, py, pz = p
    qw, qx, qy, qz = q
    return np.array([
        pw * qw - px * qx - py * qy - pz * qz,
        pw * qx + px * qw + py * qz - pz * qy,
        pw * qy - px * qz + py * qw + pz * qx,
        pw * qz + px * qy - py * qx + pz * qw,
    ])


def _canonical(q: np.ndarray) -> np.ndarray:
    if q[0] < 0.0:
        return -q
    if q[0] == 0.0:
        # 180 degree rotations: first non-zero vector component positive
        for component in q[1:]:
            if component != 0.0:
                return -q if component < 0.0 else q
    return q


@dataclass(frozen=True, eq=False)
class Rotation:
    """Unit quaternion rotation, canonical w >= 0"""

    quaternion: np.ndarray

    def __post_init__(self):
        q = np.array(self.quaternion, dtype=float).reshape(4)
        norm = np.linalg.norm(q)
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError(f"Invalid quaternion: {q}")
        q = _canonical(q / norm)
        q.setflags(write=False)
        object.__setattr__(self, "quaternion", q)

    @classmethod
    def identity(cls) -> "Rotation":
        return cls(np.array([1.0, 0.0, 0.0, 0.0]))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Rotation":
        x, y, z, w = ScipyRotation.from_matrix(np.asarray(matrix, dtype=float)).as_quat()
        return cls(np.array([w, x, y, z]))

    @classmethod
    def from_xyzw(cls, xyzw) -> "Rotation":
        x, y, z, w = xyzw
        return cls(np.array([w, x, y, z]))

    @property
    def w(self) -> float:
        return float(self.quaternion[0])

    @property
    def vec(self) -> np.ndarray:
        return self.quaternion[1:]

    @property
    def xyzw(self) -> np.ndarray:
        return np.array([*self.quaternion[1:], self.quaternion[0]])

    @cached_property
    def matrix(self) -> np.ndarray:
        w, x, y, z = self.quaternion
        m = np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])
        m.setflags(write=False)
        return m

    def inverse(self) -> "Rotation":
        w, x, y, z = self.quaternion
        return Rotation(np.array([w, -x, -y, -z]))

    def __mul__(self, other: "Rotation") -> "Rotation":
        if not isinstance(other, Rotation):
            return NotImplemented
        return Rotation(quat_multiply(self.quaternion, other.quaternion))

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        """Rotate a 3-vector or an (N, 3) array"""
        vectors = np.asarray(vectors, dtype=float)
        if vectors.ndim == 1:
            return self.matrix @ vectors
        return vectors @ self.matrix.T

    def to_scipy(self) -> ScipyRotation:
        return ScipyRotation.from_quat(self.xyzw)

    def angle_to(self, other: "Rotation") -> float:
        """Geodesic distance in radians"""
        return float(np.linalg.norm(so3_log(self.inverse() * other)))

    def isclose(self, other: "Rotation", atol: float = 1e-9) -> bool:
        return bool(np.allclose(self.quaternion, other.quaternion, atol=atol, rtol=0.0))

    def __repr__(self) -> str:
        w, x, y, z = self.quaternion
        return f"Rotation(w={w:.9f}, x={x:.9f}, y={y:.9f}, z={z:.9f})"


def so3_exp(omega: Union[np.ndarray, list, tuple]) -> Rotation:
    """Exponential map from a rotation vector (rad) to a Rotation"""
    omega = np.asarray(omega, dtype=float).reshape(3)
    theta = np.linalg.norm(omega)
    if theta < SMALL_ANGLE:
        # second-order Taylor expansion of cos(θ/2) and sin(θ/2)/θ
        theta_sq = theta * theta
        w = 1.0 - theta_sq / 8.0
        xyz = 0.5 * omega * (1.0 - theta_sq / 24.0)
    else:
        half = 0.5 * theta
        w = np.cos(half)
        xyz = np.sin(half) / theta * omega
    return Rotation(np.array([w, *xyz]))


def so3_log(rotation: Rotation) -> np.ndarray:
    """Logarithm map, result in the ball |ω| <= π; 180° about z maps to (0, 0, +π)"""
    w = rotation.w
    v = np.array(rotation.vec)
    n = np.linalg.norm(v)
    if n < SMALL_ANGLE:
        return 2.0 * v / w
    theta = 2.0 * np.arctan2(n, w)
    return theta / n * v


def right_jacobian(phi: np.ndarray) -> np.ndarray:
    """Right Jacobian of SO(3): Exp(φ + δ) ≈ Exp(φ) Exp(Jr(φ) δ)"""
    phi = np.asarray(phi, dtype=float)
    theta = np.linalg.norm(phi)
    K = skew(phi)
    if theta < 1e-5:
        return np.eye(3) - 0.5 * K + K @ K / 6.0
    theta_sq = theta * theta
    return (
        np.eye(3)
        - (1.0 - np.cos(theta)) / theta_sq * K
        + (theta - np.sin(theta)) / (theta_sq * theta) * (K @ K)
    )


def right_jacobian_inverse(phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    theta = np.linalg.norm(phi)
    K = skew(phi)
    if theta < 1e-5:
        return np.eye(3) + 0.5 * K + K @ K / 12.0
    coefficient = 1.0 / (theta * theta) - (1.0 + np.cos(theta)) / (2.0 * theta * np.sin(theta))
    return np.eye(3) + 0.5 * K + coefficient * (K @ K)


def left_jacobian_inverse(phi: np.ndarray) -> np.ndarray:
    return right_jacobian_inverse(-np.asarray(phi, dtype=float))


def quaternion_left_product_block(rotation: Rotation) -> np.ndarray:
    """d vec(E ⊗ [1, u]) / du = w·I + [vec]×, used by the quaternion residual Jacobians"""
    return rotation.w * np.eye(3) + skew(rotation.vec)


def batch_exp_matrices(rotvecs: np.ndarray) -> np.ndarray:
    """(N, 3) rotation vectors to (N, 3, 3) matrices"""
    return ScipyRotation.from_rotvec(np.asarray(rotvecs, dtype=float)).as_matrix()


def batch_right_jacobians(phis: np.ndarray) -> np.ndarray:
    """right_jacobian over (N, 3) rotation vectors, returns (N, 3, 3)"""
    phis = np.asarray(phis, dtype=float).reshape(-1, 3)
    theta = np.linalg.norm(phis, axis=1)
    K = np.zeros((phis.shape[0], 3, 3))
    K[:, 0, 1], K[:, 0, 2] = -phis[:, 2], phis[:, 1]
    K[:, 1, 0], K[:, 1, 2] = phis[:, 2], -phis[:, 0]
    K[:, 2, 0], K[:, 2, 1] = -phis[:, 1], phis[:, 0]
    KK = K @ K
    small = theta < 1e-5
    safe = np.where(small, 1.0, theta)
    a = np.where(small, 0.5, (1.0 - np.cos(safe)) / safe ** 2)
    b = np.where(small, 1.0 / 6.0, (safe - np.sin(safe)) / safe ** 3)
    return np.eye(3) - a[:, None, None] * K + b[:, None, None] * KK
