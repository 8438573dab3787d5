from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class TimedPoint:
    """One LiDAR return: sensor-frame position (m) and absolute timestamp (s)"""

    position: np.ndarray
    timestamp: float


@dataclass(frozen=True, eq=False)
class Sweep:
    """Points of one LiDAR revolution stored column-wise for vectorized processing"""

    points: np.ndarray       # (N, 3)
    timestamps: np.ndarray   # (N,)
    t_begin: float
    t_end: float
    index: int = 0

    def __post_init__(self):
        points = np.array(self.points, dtype=float).reshape(-1, 3)
        timestamps = np.array(self.timestamps, dtype=float).reshape(-1)
        if points.shape[0] != timestamps.shape[0]:
            raise ValueError(f"{points.shape[0]} points but {timestamps.shape[0]} timestamps")
        if not self.t_begin < self.t_end:
            raise ValueError(f"Sweep {self.index}: t_begin {self.t_begin} must precede t_end {self.t_end}")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "t_begin", float(self.t_begin))
        object.__setattr__(self, "t_end", float(self.t_end))

    @classmethod
    def from_points(cls, points: Sequence[TimedPoint], t_begin: float, t_end: float, index: int = 0) -> "Sweep":
        positions = np.array([p.position for p in points], dtype=float).reshape(-1, 3)
        timestamps = np.array([p.timestamp for p in points], dtype=float)
        return cls(positions, timestamps, t_begin, t_end, index)

    def __len__(self) -> int:
        return self.points.shape[0]

    def __iter__(self) -> Iterator[TimedPoint]:
        for position, timestamp in zip(self.points, self.timestamps):
            yield TimedPoint(position, float(timestamp))

    @property
    def duration(self) -> float:
        return self.t_end - self.t_begin

    def subset(self, indices: np.ndarray) -> "Sweep":
        return Sweep(self.points[indices], self.timestamps[indices], self.t_begin, self.t_end, self.index)

    def with_points(self, points: np.ndarray) -> "Sweep":
        """Same timestamps and boundaries, new coordinates"""
        return Sweep(points, self.timestamps, self.t_begin, self.t_end, self.index)

    def alphas(self) -> np.ndarray:
        """Normalized position of every point inside the sweep, clipped to [0, 1]"""
        return np.clip((self.timestamps - self.t_begin) / self.duration, 0.0, 1.0)

    def timestamps_inside(self, tolerance: float = 1e-9) -> bool:
        if len(self) == 0:
            return True
        return bool(
            self.timestamps.min() >= self.t_begin - tolerance
            and self.timestamps.max() <= self.t_end + tolerance
        )
