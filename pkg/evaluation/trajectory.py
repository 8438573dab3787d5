import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

import numpy as np

from errors import FileFormatError
from geometry import NavState, Pose, Rotation

logger = logging.getLogger(__name__)

MAX_EXTRAPOLATION = 0.01  # s


@dataclass(eq=False)
class Trajectory:
    """Time-ordered poses, optionally with world-frame velocities"""

    timestamps: np.ndarray
    positions: np.ndarray
    quaternions: np.ndarray              # (n, 4) as w, x, y, z
    velocities: Optional[np.ndarray] = None

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=float).reshape(-1)
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        self.quaternions = np.asarray(self.quaternions, dtype=float).reshape(-1, 4)
        n = self.timestamps.size
        if self.positions.shape[0] != n or self.quaternions.shape[0] != n:
            raise ValueError("Trajectory arrays disagree in length")
        if n > 1 and np.any(np.diff(self.timestamps) <= 0.0):
            raise ValueError("Trajectory timestamps must be strictly increasing")
        if self.velocities is not None:
            self.velocities = np.asarray(self.velocities, dtype=float).reshape(n, 3)

    @classmethod
    def from_states(cls, states: Iterable[NavState]) -> "Trajectory":
        states = list(states)
        return cls(
            timestamps=np.array([s.timestamp for s in states]),
            positions=np.array([s.translation for s in states]).reshape(-1, 3),
            quaternions=np.array([s.rotation.quaternion for s in states]).reshape(-1, 4),
            velocities=np.array([s.velocity for s in states]).reshape(-1, 3),
        )

    def __len__(self) -> int:
        return self.timestamps.size

    def pose(self, index: int) -> Pose:
        return Pose(Rotation(self.quaternions[index]), self.positions[index])

    def speeds(self) -> np.ndarray:
        """Speed per sample; finite differences of position when no velocities are stored"""
        if self.velocities is not None:
            return np.linalg.norm(self.velocities, axis=1)
        if len(self) < 2:
            return np.zeros(len(self))
        steps = np.linalg.norm(np.diff(self.positions, axis=0), axis=1) / np.diff(self.timestamps)
        return np.append(steps, steps[-1])

    def positions_at(self, times: np.ndarray,
                     max_extrapolation: float = MAX_EXTRAPOLATION) -> Tuple[np.ndarray, np.ndarray]:
        """Linearly interpolated positions at `times`; returns (positions, mask of usable times)"""
        times = np.asarray(times, dtype=float)
        usable = (times >= self.timestamps[0] - max_extrapolation) & (times <= self.timestamps[-1] + max_extrapolation)
        clamped = np.clip(times, self.timestamps[0], self.timestamps[-1])
        positions = np.column_stack([
            np.interp(clamped, self.timestamps, self.positions[:, axis]) for axis in range(3)
        ])
        return positions, usable


def read_trajectory(path) -> Trajectory:
    """Parse 'timestamp tx ty tz qx qy qz qw' lines; blank lines and '#' comments are skipped"""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise FileFormatError(f"Cannot read trajectory {path}: {e}")
    rows: List[List[float]] = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 8:
            raise FileFormatError(f"{path}:{number}: expected 8 fields, found {len(fields)}")
        try:
            rows.append([float(v) for v in fields])
        except ValueError:
            raise FileFormatError(f"{path}:{number}: non-numeric field")
    if not rows:
        raise FileFormatError(f"{path}: no trajectory samples")
    data = np.array(rows)
    quaternions = np.column_stack([data[:, 7], data[:, 4:7]])
    try:
        return Trajectory(data[:, 0], data[:, 1:4], quaternions)
    except ValueError as e:
        raise FileFormatError(f"{path}: {e}")


def format_trajectory_line(timestamp: float, pose: Pose) -> str:
    qx, qy, qz, qw = pose.rotation.xyzw
    tx, ty, tz = pose.translation
    return f"{timestamp:.9f} {tx:.9f} {ty:.9f} {tz:.9f} {qx:.9f} {qy:.9f} {qz:.9f} {qw:.9f}"


def write_trajectory(path, trajectory: Trajectory) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [format_trajectory_line(t, trajectory.pose(i)) for i, t in enumerate(trajectory.timestamps)]
    path.write_text("\n".join(lines) + ("\n" if lines else ""))
    logger.debug(f"Wrote {len(lines)} poses to {path}")
    return path


def write_states(path, states: Iterable[NavState]) -> Path:
    """Trajectory file from states that may repeat a timestamp (begin/end pairs)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [format_trajectory_line(s.timestamp, s.pose) for s in states]
    path.write_text("\n".join(lines) + ("\n" if lines else ""))
    return path
