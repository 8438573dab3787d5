import dataclasses
from dataclasses import dataclass

import numpy as np

from .pose import Pose
from .rotation import Rotation, so3_exp, so3_log

# Error-state layout shared by the optimizer and the pre-integration residual
STATE_DIM = 15
T_SLICE = slice(0, 3)
R_SLICE = slice(3, 6)
V_SLICE = slice(6, 9)
BA_SLICE = slice(9, 12)
BG_SLICE = slice(12, 15)


def _frozen_vector(value) -> np.ndarray:
    v = np.array(value, dtype=float).reshape(3)
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class NavState:
    """Navigation state: world translation, attitude, velocity and IMU biases"""

    translation: np.ndarray
    rotation: Rotation
    velocity: np.ndarray
    accel_bias: np.ndarray
    gyro_bias: np.ndarray
    timestamp: float

    def __post_init__(self):
        for name in ("translation", "velocity", "accel_bias", "gyro_bias"):
            object.__setattr__(self, name, _frozen_vector(getattr(self, name)))
        object.__setattr__(self, "timestamp", float(self.timestamp))

    @classmethod
    def at_rest(cls, timestamp: float = 0.0, rotation: Rotation = None) -> "NavState":
        zero = np.zeros(3)
        return cls(zero, rotation or Rotation.identity(), zero, zero, zero, timestamp)

    @property
    def pose(self) -> Pose:
        return Pose(self.rotation, self.translation)

    def replace(self, **changes) -> "NavState":
        return dataclasses.replace(self, **changes)

    def is_finite(self) -> bool:
        values = np.concatenate([
            self.translation, self.rotation.quaternion, self.velocity,
            self.accel_bias, self.gyro_bias, [self.timestamp],
        ])
        return bool(np.all(np.isfinite(values)))

    def isclose(self, other: "NavState", atol: float = 1e-9) -> bool:
        return bool(np.linalg.norm(boxminus(self, other), ord=np.inf) <= atol)

    def as_vector_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "translation": self.translation.tolist(),
            "rotation_wxyz": self.rotation.quaternion.tolist(),
            "velocity": self.velocity.tolist(),
            "accel_bias": self.accel_bias.tolist(),
            "gyro_bias": self.gyro_bias.tolist(),
        }


def boxplus(x: NavState, delta: np.ndarray) -> NavState:
    """Additive on t, v, biases; right-multiplicative on rotation"""
    delta = np.asarray(delta, dtype=float).reshape(STATE_DIM)
    return NavState(
        translation=x.translation + delta[T_SLICE],
        rotation=x.rotation * so3_exp(delta[R_SLICE]),
        velocity=x.velocity + delta[V_SLICE],
        accel_bias=x.accel_bias + delta[BA_SLICE],
        gyro_bias=x.gyro_bias + delta[BG_SLICE],
        timestamp=x.timestamp,
    )


def boxminus(x: NavState, y: NavState) -> np.ndarray:
    """Error state δ such that boxplus(y, δ) == x"""
    delta = np.zeros(STATE_DIM)
    delta[T_SLICE] = x.translation - y.translation
    delta[R_SLICE] = so3_log(y.rotation.inverse() * x.rotation)
    delta[V_SLICE] = x.velocity - y.velocity
    delta[BA_SLICE] = x.accel_bias - y.accel_bias
    delta[BG_SLICE] = x.gyro_bias - y.gyro_bias
    return delta
