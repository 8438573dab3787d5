"""
Analytic ground-truth trajectories.

Every moving trajectory starts at rest at the origin heading +x, holds still
for `lead_in` seconds (the initialization segment) and then blends into its
nominal motion through a smoothstep time warp s(t), so position, velocity and
acceleration stay continuous.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Tuple

import numpy as np

from geometry import NavState, Rotation, skew, so3_exp

logger = logging.getLogger(__name__)


class TrajectoryKind(Enum):
    STATIONARY = "stationary"
    CONSTANT_TWIST = "constant-twist"
    CIRCULAR = "circular"
    FIGURE_EIGHT = "figure-eight"


class Kinematics(NamedTuple):
    rotation: Rotation
    position: np.ndarray
    velocity: np.ndarray        # world frame
    acceleration: np.ndarray    # world frame
    angular_rate: np.ndarray    # body frame


@dataclass(frozen=True)
class TrajectorySpec:
    kind: TrajectoryKind = TrajectoryKind.CIRCULAR
    duration: float = 30.0
    radius: float = 5.0
    speed: float = 2.0
    linear_velocity: Tuple[float, float, float] = (1.0, 0.0, 0.0)
    angular_velocity: Tuple[float, float, float] = (0.0, 0.0, 0.2)
    figure_eight_scale: float = 3.0
    lead_in: float = 2.0
    ramp: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if not self.duration > 0.0:
            raise ValueError(f"Trajectory duration must be positive, got {self.duration}")
        if self.lead_in < 0.0 or not self.ramp > 0.0:
            raise ValueError("lead_in must be >= 0 and ramp > 0")
        if self.kind == TrajectoryKind.CIRCULAR and not (self.radius > 0.0 and self.speed > 0.0):
            raise ValueError("Circular trajectories need positive radius and speed")

    def time_warp(self, t: float) -> Tuple[float, float, float]:
        """(s, ds/dt, d²s/dt²)"""
        if t <= self.lead_in:
            return 0.0, 0.0, 0.0
        u = (t - self.lead_in) / self.ramp
        if u < 1.0:
            return self.ramp * (u ** 3 - 0.5 * u ** 4), 3.0 * u ** 2 - 2.0 * u ** 3, (6.0 * u - 6.0 * u ** 2) / self.ramp
        return 0.5 * self.ramp + (t - self.lead_in - self.ramp), 1.0, 0.0

    def twist(self) -> Tuple[np.ndarray, np.ndarray]:
        """Body-frame (v, ω) of the twist-driven kinds"""
        if self.kind == TrajectoryKind.CIRCULAR:
            return np.array([self.speed, 0.0, 0.0]), np.array([0.0, 0.0, self.speed / self.radius])
        return np.asarray(self.linear_velocity, dtype=float), np.asarray(self.angular_velocity, dtype=float)

    def kinematics(self, t: float) -> Kinematics:
        if t < -1e-9 or t > self.duration + 1e-9:
            raise ValueError(f"t={t} outside trajectory range [0, {self.duration}]")
        if self.kind == TrajectoryKind.STATIONARY:
            zero = np.zeros(3)
            return Kinematics(Rotation.identity(), zero, zero, zero, zero)
        s, ds, dds = self.time_warp(t)
        if self.kind == TrajectoryKind.FIGURE_EIGHT:
            return self._figure_eight(s, ds, dds)
        return self._constant_twist(s, ds, dds)

    def _constant_twist(self, s: float, ds: float, dds: float) -> Kinematics:
        v, w = self.twist()
        phi = w * s
        theta = np.linalg.norm(phi)
        K = skew(phi)
        if theta < 1e-8:
            left = np.eye(3) + 0.5 * K
        else:
            left = np.eye(3) + (1.0 - np.cos(theta)) / theta ** 2 * K + (theta - np.sin(theta)) / theta ** 3 * (K @ K)
        rotation = so3_exp(phi)
        R = rotation.matrix
        return Kinematics(
            rotation=rotation,
            position=left @ v * s,
            velocity=R @ v * ds,
            acceleration=R @ (np.cross(w, v) * ds * ds + v * dds),
            angular_rate=w * ds,
        )

    def _figure_eight(self, s: float, ds: float, dds: float) -> Kinematics:
        a = self.figure_eight_scale
        omega = self.speed / (a * np.sqrt(2.0))
        theta = omega * s
        # path derivatives in the unrotated frame, tangent at s=0 along (1, 1)
        p = a * np.array([np.sin(theta), 0.5 * np.sin(2.0 * theta)])
        dp = a * omega * np.array([np.cos(theta), np.cos(2.0 * theta)])
        ddp = a * omega ** 2 * np.array([-np.sin(theta), -2.0 * np.sin(2.0 * theta)])
        c = np.sqrt(0.5)
        turn = np.array([[c, c], [-c, c]])
        yaw = np.arctan2(*(turn @ dp)[::-1])
        yaw_rate = (dp[0] * ddp[1] - dp[1] * ddp[0]) / (dp @ dp)
        return Kinematics(
            rotation=so3_exp([0.0, 0.0, yaw]),
            position=np.append(turn @ p, 0.0),
            velocity=np.append(turn @ dp * ds, 0.0),
            acceleration=np.append(turn @ (ddp * ds * ds + dp * dds), 0.0),
            angular_rate=np.array([0.0, 0.0, yaw_rate * ds]),
        )


def exact_state(spec: TrajectorySpec, t: float) -> NavState:
    """Ground-truth navigation state at time t, zero biases"""
    k = spec.kinematics(t)
    zero = np.zeros(3)
    return NavState(k.position, k.rotation, k.velocity, zero, zero, t)
