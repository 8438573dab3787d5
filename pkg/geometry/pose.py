from dataclasses import dataclass

import numpy as np

from .rotation import Rotation, so3_exp, so3_log


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform p' = R p + t"""

    rotation: Rotation
    translation: np.ndarray

    def __post_init__(self):
        t = np.array(self.translation, dtype=float).reshape(3)
        t.setflags(write=False)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(Rotation.identity(), np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Pose":
        matrix = np.asarray(matrix, dtype=float)
        return cls(Rotation.from_matrix(matrix[:3, :3]), matrix[:3, 3])

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation.matrix
        m[:3, 3] = self.translation
        return m

    def __mul__(self, other: "Pose") -> "Pose":
        if not isinstance(other, Pose):
            return NotImplemented
        return Pose(
            self.rotation * other.rotation,
            self.rotation.apply(other.translation) + self.translation,
        )

    def inverse(self) -> "Pose":
        inv = self.rotation.inverse()
        return Pose(inv, -inv.apply(self.translation))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform a 3-vector or an (N, 3) array"""
        return self.rotation.apply(points) + self.translation

    def isclose(self, other: "Pose", atol: float = 1e-9) -> bool:
        return self.rotation.isclose(other.rotation, atol) and bool(
            np.allclose(self.translation, other.translation, atol=atol, rtol=0.0)
        )

    def __repr__(self) -> str:
        tx, ty, tz = self.translation
        return f"Pose({self.rotation!r}, t=({tx:.9f}, {ty:.9f}, {tz:.9f}))"


def interpolate_pose(a: Pose, b: Pose, alpha: float) -> Pose:
    """Slerp on rotation along the shortest arc, lerp on translation"""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"Interpolation factor must be in [0, 1], got {alpha}")
    if alpha == 0.0:
        return a
    if alpha == 1.0:
        return b
    delta = so3_log(a.rotation.inverse() * b.rotation)
    rotation = a.rotation * so3_exp(alpha * delta)
    translation = (1.0 - alpha) * a.translation + alpha * b.translation
    return Pose(rotation, translation)
